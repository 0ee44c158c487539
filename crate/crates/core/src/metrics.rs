//! Per-step diagnostics: divergence to the optimal vertex, simple regret,
//! estimated/real/pseudo regret, the `U_t` statistic, the one-step
//! decomposition identity, and the lemma checks used by the audit.

use std::fmt;

use crate::env::InstanceSpec;
use crate::ftrl::{bregman, bregman_to_vertex, ScaledLosses, SimplexPoint};
use crate::policy::{empirical_argmin, StepRecord};

/// Slack for checks that are pure arithmetic on solver output.
pub const ARITHMETIC_SLACK: f64 = 1e-9;

/// Bound on the decomposition residual; the identity passes through two
/// solver calls and several `1/√p` terms.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-7;

/// `Σ_{i≠i*} Δ_i p_i`.
pub fn simple_regret(p: &SimplexPoint, spec: &InstanceSpec) -> f64 {
    assert_eq!(p.dim(), spec.dim(), "dimension mismatch");
    p.probs()
        .iter()
        .zip(spec.gaps())
        .enumerate()
        .filter(|(i, _)| *i != spec.star())
        .map(|(_, (pi, gap))| pi * gap)
        .sum()
}

/// Running regret sums along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretState {
    /// `Σ_{s≤t} ⟨ℓ̂_s, p_s⟩`
    pub sum_inner: f64,
    /// `L̂_{t+1}`
    pub cumulative_est: Vec<f64>,
    /// `Σ_{s≤t} ℓ_{s,i}` per arm
    pub cumulative_real_loss_per_arm: Vec<f64>,
    /// `Σ_{s≤t} ℓ_{s,I_s}`
    pub incurred_real: f64,
    /// `Σ_{s≤t} Δ_{I_s}`
    pub pseudo_regret: f64,
    pub rounds: usize,
}

impl RegretState {
    pub fn new(arms: usize) -> Self {
        Self {
            sum_inner: 0.0,
            cumulative_est: vec![0.0; arms],
            cumulative_real_loss_per_arm: vec![0.0; arms],
            incurred_real: 0.0,
            pseudo_regret: 0.0,
            rounds: 0,
        }
    }

    /// Folds one round in. `gaps` is absent for replayed (non-stochastic)
    /// losses, in which case pseudo-regret is not tracked.
    pub fn record(&mut self, step: &StepRecord, losses: &[f64], gaps: Option<&[f64]>) {
        self.sum_inner += step.inner_with_point();
        for (acc, est) in self.cumulative_est.iter_mut().zip(&step.est_loss) {
            *acc += est;
        }
        for (acc, l) in self.cumulative_real_loss_per_arm.iter_mut().zip(losses) {
            *acc += l;
        }
        self.incurred_real += step.observed_loss;
        if let Some(gaps) = gaps {
            self.pseudo_regret += gaps[step.chosen];
        }
        self.rounds += 1;
    }

    /// `R̂_t = Σ ⟨ℓ̂_s, p_s⟩ - min_i L̂_{t+1,i}`.
    pub fn estimated_regret(&self) -> f64 {
        self.sum_inner - min(&self.cumulative_est)
    }

    /// `R_t = Σ ℓ_{s,I_s} - min_i Σ ℓ_{s,i}`.
    pub fn real_regret(&self) -> f64 {
        self.incurred_real - min(&self.cumulative_real_loss_per_arm)
    }

    /// `U_t = L̂_{t+1,star} - Σ ⟨ℓ̂_s, p_s⟩`.
    pub fn u_statistic(&self, star: usize) -> f64 {
        self.cumulative_est[star] - self.sum_inner
    }
}

fn min(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn estimated_regret(state: &RegretState) -> f64 {
    state.estimated_regret()
}

pub fn u_statistic(state: &RegretState, star: usize) -> f64 {
    state.u_statistic(star)
}

/// `max_i Σ_s ⟨ℓ̂_s, p_s - e_i⟩` recomputed from stored records.
pub fn estimated_regret_replay(records: &[StepRecord]) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    (0..first.p.dim())
        .map(|i| {
            records
                .iter()
                .map(|r| {
                    let inner: f64 = r.est_loss.iter().zip(r.p.probs()).map(|(l, p)| l * p).sum();
                    inner - r.est_loss[i]
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The three terms of the one-step decomposition of `⟨p_t - e_star, ℓ̂_t⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionTerms {
    pub lhs: f64,
    /// `⟨p_t - p_{t+1}, ℓ̂_t⟩ - D(p_{t+1}, p_t) / η_{t+1}`
    pub stability: f64,
    /// `(D(e_star, p_t) - D(e_star, p_{t+1})) / η_{t+1}`
    pub penalty: f64,
    /// `(1/η_{t+1} - 1/η_t) ⟨p_{t+1} - e_star, η_t L̂_t⟩`
    pub drift: f64,
}

impl DecompositionTerms {
    pub fn residual(&self) -> f64 {
        (self.lhs - (self.stability + self.penalty + self.drift)).abs()
    }
}

pub fn decomposition_terms(
    prev: &StepRecord,
    next_p: &SimplexPoint,
    eta_t: f64,
    eta_next: f64,
    cumulative_t: &[f64],
    star: usize,
) -> DecompositionTerms {
    let p = prev.p.probs();
    let q = next_p.probs();
    let est = &prev.est_loss;

    let lhs = p.iter().zip(est).map(|(pi, li)| pi * li).sum::<f64>() - est[star];

    let moved: f64 = p.iter().zip(q).zip(est).map(|((pi, qi), li)| (pi - qi) * li).sum();
    let stability = moved - bregman(q, &prev.p) / eta_next;

    let penalty = (bregman_to_vertex(&prev.p, star) - bregman_to_vertex(next_p, star)) / eta_next;

    let inner: f64 = q
        .iter()
        .zip(cumulative_t)
        .enumerate()
        .map(|(i, (qi, li))| {
            let e = if i == star { 1.0 } else { 0.0 };
            (qi - e) * eta_t * li
        })
        .sum();
    let drift = (1.0 / eta_next - 1.0 / eta_t) * inner;

    DecompositionTerms {
        lhs,
        stability,
        penalty,
        drift,
    }
}

/// `|⟨p_t - e_star, ℓ̂_t⟩ - (I + II + III)|`; zero in exact arithmetic when
/// `next_p` is the FTRL iterate at `η_{t+1}` for `L̂_t + ℓ̂_t`.
pub fn decomposition_residual(
    prev: &StepRecord,
    next_p: &SimplexPoint,
    eta_t: f64,
    eta_next: f64,
    cumulative_t: &[f64],
    star: usize,
) -> f64 {
    decomposition_terms(prev, next_p, eta_t, eta_next, cumulative_t, star).residual()
}

/// Which deterministic property a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lemma {
    /// `p_{t+1,i} ≤ 7d p_{t,i} + 1/t`
    Compare,
    /// `4(ηL̲_i + 2√d)^-2 ≤ p_i ≤ 4(ηL̲_i)^-2`
    Sandwich,
    /// one-step decomposition identity
    Decomposition,
    /// `φ_i(η_{t+1}λ) - φ_i(η_tλ) ≤ 1/t`
    LearningRateContinuity,
    /// `L̲_{t,i*} ≤ U_{t-1}^+ + R̂_{t-1}^+`
    UnderlineSplit,
    /// `i_t^* = i*` implies `p_{t,i*} ≥ 1/d`
    ConcentrationEvent,
}

impl Lemma {
    pub fn name(self) -> &'static str {
        match self {
            Lemma::Compare => "compare",
            Lemma::Sandwich => "sandwich",
            Lemma::Decomposition => "decomposition",
            Lemma::LearningRateContinuity => "learning-rate-continuity",
            Lemma::UnderlineSplit => "underline-split",
            Lemma::ConcentrationEvent => "concentration-event",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub lemma: Lemma,
    pub round: usize,
    pub arm: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "round {} lemma {}", self.round, self.lemma)?;
        if let Some(arm) = self.arm {
            write!(f, " arm {}", arm + 1)?;
        }
        write!(f, ": lhs {:.17e} > rhs {:.17e}", self.lhs, self.rhs)
    }
}

/// Growth check between consecutive iterates of one trajectory at round `t`.
pub fn audit_step(
    prev_p: &SimplexPoint,
    next_p: &SimplexPoint,
    d: usize,
    t: usize,
) -> Vec<Violation> {
    let mut out = Vec::new();
    check_compare(prev_p, next_p, d, t, &mut out);
    out
}

pub fn check_compare(
    prev_p: &SimplexPoint,
    next_p: &SimplexPoint,
    d: usize,
    t: usize,
    out: &mut Vec<Violation>,
) {
    let factor = 7.0 * d as f64;
    let slack = 1.0 / t as f64 + ARITHMETIC_SLACK;
    for (i, (&prev, &next)) in prev_p.probs().iter().zip(next_p.probs()).enumerate() {
        let rhs = factor * prev + slack;
        if next > rhs {
            out.push(Violation {
                lemma: Lemma::Compare,
                round: t,
                arm: Some(i),
                lhs: next,
                rhs,
            });
        }
    }
}

/// Both sides of the sandwich for `p` against `η L̲`.
pub fn check_sandwich(p: &SimplexPoint, scaled: &ScaledLosses, t: usize, out: &mut Vec<Violation>) {
    let two_root_d = 2.0 * (p.dim() as f64).sqrt();
    for (i, (&pi, &x)) in p.probs().iter().zip(scaled.values()).enumerate() {
        let lower = 4.0 / ((x + two_root_d) * (x + two_root_d));
        if pi + ARITHMETIC_SLACK < lower {
            out.push(Violation {
                lemma: Lemma::Sandwich,
                round: t,
                arm: Some(i),
                lhs: lower,
                rhs: pi,
            });
        }
        if x > 0.0 {
            let upper = 4.0 / (x * x);
            if pi > upper + ARITHMETIC_SLACK {
                out.push(Violation {
                    lemma: Lemma::Sandwich,
                    round: t,
                    arm: Some(i),
                    lhs: pi,
                    rhs: upper,
                });
            }
        }
    }
}

/// `next_exact` is the iterate at `η_{t+1}`, `intermediate` the iterate at
/// `η_t`, both for the same cumulative losses.
pub fn check_learning_rate_continuity(
    next_exact: &SimplexPoint,
    intermediate: &SimplexPoint,
    t: usize,
    out: &mut Vec<Violation>,
) {
    let rhs = 1.0 / t as f64 + ARITHMETIC_SLACK;
    for (i, (&a, &b)) in next_exact.probs().iter().zip(intermediate.probs()).enumerate() {
        if a - b > rhs {
            out.push(Violation {
                lemma: Lemma::LearningRateContinuity,
                round: t,
                arm: Some(i),
                lhs: a - b,
                rhs,
            });
        }
    }
}

/// `L̂_{t,star} - min L̂_t ≤ U_{t-1}^+ + R̂_{t-1}^+`, where `before` is the
/// regret state after round `t-1`.
pub fn check_underline_split(
    cumulative_t: &[f64],
    star: usize,
    before: &RegretState,
    t: usize,
    out: &mut Vec<Violation>,
) {
    let lhs = cumulative_t[star] - min(cumulative_t);
    let rhs = before.u_statistic(star).max(0.0) + before.estimated_regret().max(0.0);
    if lhs > rhs + ARITHMETIC_SLACK {
        out.push(Violation {
            lemma: Lemma::UnderlineSplit,
            round: t,
            arm: Some(star),
            lhs,
            rhs,
        });
    }
}

/// When the empirical leader is the optimal arm, it carries at least `1/d`.
pub fn check_concentration_event(
    p: &SimplexPoint,
    cumulative_t: &[f64],
    star: usize,
    t: usize,
    out: &mut Vec<Violation>,
) {
    if empirical_argmin(cumulative_t) == star {
        let rhs = 1.0 / p.dim() as f64;
        if p[star] + ARITHMETIC_SLACK < rhs {
            out.push(Violation {
                lemma: Lemma::ConcentrationEvent,
                round: t,
                arm: Some(star),
                lhs: rhs,
                rhs: p[star],
            });
        }
    }
}

pub fn check_decomposition(residual: f64, t: usize, out: &mut Vec<Violation>) {
    if !(residual <= DECOMPOSITION_TOLERANCE) {
        out.push(Violation {
            lemma: Lemma::Decomposition,
            round: t,
            arm: None,
            lhs: residual,
            rhs: DECOMPOSITION_TOLERANCE,
        });
    }
}

/// Diagnostics for round `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub t: usize,
    pub bregman_to_star: f64,
    pub bregman_squared: f64,
    pub simple_regret: f64,
    pub event_a: bool,
    pub rhat_plus: f64,
    pub u_plus: f64,
    pub decomposition_residual: f64,
    pub max_importance_weight: f64,
}

impl StepDiagnostics {
    /// `record` is round `t`, `cumulative_t` is `L̂_t`, `regret` already
    /// includes round `t`.
    pub fn new(
        record: &StepRecord,
        cumulative_t: &[f64],
        regret: &RegretState,
        spec: &InstanceSpec,
        decomposition_residual: f64,
        max_importance_weight: f64,
    ) -> Self {
        let star = spec.star();
        let divergence = bregman_to_vertex(&record.p, star);
        Self {
            t: record.t,
            bregman_to_star: divergence,
            bregman_squared: divergence * divergence,
            simple_regret: simple_regret(&record.p, spec),
            event_a: empirical_argmin(cumulative_t) == star,
            rhat_plus: regret.estimated_regret().max(0.0),
            u_plus: regret.u_statistic(star).max(0.0),
            decomposition_residual,
            max_importance_weight,
        }
    }
}
