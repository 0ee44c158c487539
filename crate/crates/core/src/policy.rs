//! The 1/2-Tsallis-INF policy, one round at a time.

use thiserror::Error;

use crate::ftrl::{solve_ftrl, DualSolution, SimplexPoint, SolverError};
use crate::rng::UniformSource;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(
        "alpha must lie in (0, 1), got {0}; values >= 1 need the unstable-alpha override"
    )]
    InvalidAlpha(f64),
    #[error("expected {expected} losses, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("observed loss {0} is outside [0, 1]")]
    LossOutOfRange(f64),
    #[error("FTRL solve failed at round {round}: {source}")]
    Solver {
        round: usize,
        #[source]
        source: SolverError,
    },
}

/// Deliberate corruptions of the played distribution. Only used to show
/// that the lemma audit can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Floor every probability at the given value, then renormalize.
    ClipProbs(f64),
}

impl Fault {
    fn apply(self, p: &SimplexPoint) -> SimplexPoint {
        match self {
            Fault::ClipProbs(floor) => {
                let clipped: Vec<f64> = p.probs().iter().map(|&x| x.max(floor)).collect();
                let total: f64 = clipped.iter().sum();
                SimplexPoint::new(clipped.into_iter().map(|x| x / total).collect())
                    .expect("clipped point stays on the simplex")
            }
        }
    }
}

/// `η_t = α / √t`.
#[inline]
pub fn learning_rate(alpha: f64, t: usize) -> f64 {
    debug_assert!(t >= 1);
    alpha / (t as f64).sqrt()
}

/// Accepts `α ∈ (0, 1)`; with `allow_unstable` any finite `α > 0`.
pub fn validate_alpha(alpha: f64, allow_unstable: bool) -> Result<(), PolicyError> {
    let ok = alpha.is_finite() && alpha > 0.0 && (allow_unstable || alpha < 1.0);
    if ok {
        Ok(())
    } else {
        Err(PolicyError::InvalidAlpha(alpha))
    }
}

/// Inverse-CDF draw from `p` with a single uniform.
pub fn sample_arm(p: &SimplexPoint, rng: &mut impl UniformSource) -> usize {
    sample_arm_with(p, rng.next_uniform())
}

/// First arm whose cumulative probability exceeds `u`; the last arm absorbs
/// any rounding shortfall of the cumulative sum.
#[inline]
pub fn sample_arm_with(p: &SimplexPoint, u: f64) -> usize {
    let probs = p.probs();
    let mut acc = 0.0;
    for (i, &pi) in probs.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Importance-weighted estimate: `observed / p[chosen]` at `chosen`, zero
/// elsewhere.
pub fn estimate_loss(p: &SimplexPoint, chosen: usize, observed: f64) -> Vec<f64> {
    let mut est = vec![0.0; p.dim()];
    est[chosen] = observed / p[chosen];
    est
}

/// Lowest-index minimizer.
pub fn empirical_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Everything observable about one round, with `p` the distribution the arm
/// was drawn from (before the cumulative update).
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub p: SimplexPoint,
    pub chosen: usize,
    pub observed_loss: f64,
    pub est_loss: Vec<f64>,
    pub eta: f64,
    pub dual_nu: f64,
}

impl StepRecord {
    /// `⟨ℓ̂_t, p_t⟩`, which is the observed loss up to rounding.
    pub fn inner_with_point(&self) -> f64 {
        self.est_loss[self.chosen] * self.p[self.chosen]
    }

    pub fn importance_weight(&self) -> f64 {
        1.0 / self.p[self.chosen]
    }
}

/// Running state of one trajectory.
#[derive(Debug, Clone)]
pub struct PolicyState {
    alpha: f64,
    t: usize,
    cumulative: Vec<f64>,
    dual: DualSolution,
    played: Option<SimplexPoint>,
    fault: Option<Fault>,
}

impl PolicyState {
    pub fn new(arms: usize, alpha: f64) -> Result<Self, PolicyError> {
        Self::build(arms, alpha, false)
    }

    /// Admits `α ≥ 1`, outside the range the convergence guarantees cover.
    pub fn with_unstable_alpha(arms: usize, alpha: f64) -> Result<Self, PolicyError> {
        Self::build(arms, alpha, true)
    }

    fn build(arms: usize, alpha: f64, allow_unstable: bool) -> Result<Self, PolicyError> {
        assert!(arms >= 1, "policy needs at least one arm");
        validate_alpha(alpha, allow_unstable)?;
        let cumulative = vec![0.0; arms];
        let dual = solve_ftrl(learning_rate(alpha, 1), &cumulative)
            .map_err(|source| PolicyError::Solver { round: 1, source })?;
        Ok(Self {
            alpha,
            t: 1,
            cumulative,
            dual,
            played: None,
            fault: None,
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self.played = Some(fault.apply(&self.dual.point));
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn arms(&self) -> usize {
        self.cumulative.len()
    }

    /// Index of the upcoming round (starts at 1).
    pub fn round(&self) -> usize {
        self.t
    }

    pub fn eta(&self) -> f64 {
        learning_rate(self.alpha, self.t)
    }

    /// `L̂_t`, the cumulative estimate before the upcoming round.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Exact solver output for the upcoming round.
    pub fn dual(&self) -> &DualSolution {
        &self.dual
    }

    /// Distribution the next arm is drawn from; equals the solver output
    /// unless a fault is active.
    pub fn point(&self) -> &SimplexPoint {
        self.played.as_ref().unwrap_or(&self.dual.point)
    }

    pub fn step(
        &mut self,
        losses: &[f64],
        rng: &mut impl UniformSource,
    ) -> Result<StepRecord, PolicyError> {
        let u = rng.next_uniform();
        self.step_with_uniform(losses, u)
    }

    /// One round with the arm-sampling uniform supplied by the caller.
    pub fn step_with_uniform(&mut self, losses: &[f64], u: f64) -> Result<StepRecord, PolicyError> {
        if losses.len() != self.arms() {
            return Err(PolicyError::DimensionMismatch {
                expected: self.arms(),
                found: losses.len(),
            });
        }
        let p = self.point().clone();
        let chosen = sample_arm_with(&p, u);
        let observed = losses[chosen];
        if !(0.0..=1.0).contains(&observed) {
            return Err(PolicyError::LossOutOfRange(observed));
        }
        let est_loss = estimate_loss(&p, chosen, observed);
        self.cumulative[chosen] += est_loss[chosen];

        let record = StepRecord {
            t: self.t,
            p,
            chosen,
            observed_loss: observed,
            est_loss,
            eta: self.eta(),
            dual_nu: self.dual.nu,
        };

        self.t += 1;
        self.dual = solve_ftrl(self.eta(), &self.cumulative)
            .map_err(|source| PolicyError::Solver { round: self.t, source })?;
        if let Some(fault) = self.fault {
            self.played = Some(fault.apply(&self.dual.point));
        }
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{FixedUniforms, RngStream, StreamPurpose};

    #[test]
    fn learning_rate_examples() {
        assert_eq!(learning_rate(0.5, 4), 0.25);
        assert_eq!(learning_rate(0.5, 1), 0.5);
        assert!((learning_rate(0.9, 81) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn alpha_range_is_enforced() {
        assert!(validate_alpha(0.5, false).is_ok());
        for bad in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(validate_alpha(bad, false).is_err(), "{bad}");
        }
        assert!(validate_alpha(1.5, true).is_ok());
        assert!(validate_alpha(0.0, true).is_err());
        assert!(matches!(PolicyState::new(2, 1.0), Err(PolicyError::InvalidAlpha(_))));
        assert!(PolicyState::with_unstable_alpha(2, 2.0).is_ok());
    }

    #[test]
    fn sampling_edge_cases() {
        let one = SimplexPoint::new(vec![1.0]).unwrap();
        for u in [0.0, 0.5, 0.999_999] {
            assert_eq!(sample_arm_with(&one, u), 0);
        }
        let skew = SimplexPoint::new(vec![1.0 - 1e-15, 1e-15]).unwrap();
        for u in [0.0, 0.3, 0.999_999_999, 1.0 - 2e-15] {
            assert_eq!(sample_arm_with(&skew, u), 0);
        }
        assert_eq!(sample_arm_with(&skew, 1.0 - 1e-16), 1);
    }

    #[test]
    fn sampling_frequency_within_three_standard_errors() {
        let p = SimplexPoint::new(vec![0.2, 0.8]).unwrap();
        let mut rng = RngStream::new(8, 0, StreamPurpose::ArmSampling);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sample_arm(&p, &mut rng) == 0).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.2).abs() <= 3.0 * (0.16f64 / n as f64).sqrt());
    }

    #[test]
    fn estimator_examples() {
        let half = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(estimate_loss(&half, 0, 0.4), vec![0.8, 0.0]);
        let p = SimplexPoint::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(estimate_loss(&p, 1, 1.0), vec![0.0, 1.25]);
    }

    #[test]
    fn argmin_examples() {
        assert_eq!(empirical_argmin(&[0.0, 2.0, 1.0]), 0);
        assert_eq!(empirical_argmin(&[3.0, 3.0]), 0);
        assert_eq!(empirical_argmin(&[5.0, 1.0, 1.0]), 1);
    }

    #[test]
    fn first_round_is_uniform() {
        for (d, alpha) in [(2, 0.5), (5, 0.1), (7, 0.99)] {
            let state = PolicyState::new(d, alpha).unwrap();
            for &p in state.point().probs() {
                assert!((p - 1.0 / d as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hand_traced_two_arm_round() {
        let mut state = PolicyState::new(2, 0.5).unwrap();
        // u = 0.75 lands in the second half of the uniform p_1
        let mut fixture = FixedUniforms::new(vec![0.75]);
        let rec = state.step(&[0.0, 1.0], &mut fixture).unwrap();
        assert_eq!(rec.t, 1);
        assert_eq!(rec.chosen, 1);
        assert_eq!(rec.est_loss[0], 0.0);
        assert!((rec.est_loss[1] - 2.0).abs() < 1e-14);
        assert_eq!(state.cumulative()[0], 0.0);
        assert!((state.cumulative()[1] - 2.0).abs() < 1e-14);
        assert_eq!(state.round(), 2);
        assert!((state.eta() - 0.5 / 2f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn record_carries_pre_update_point() {
        let mut state = PolicyState::new(3, 0.5).unwrap();
        let before = state.point().clone();
        let rec = state.step_with_uniform(&[0.2, 0.9, 0.4], 0.1).unwrap();
        assert_eq!(rec.p, before);
        assert_eq!(rec.chosen, 0);
        assert_ne!(state.point(), &before);
        assert_eq!(rec.inner_with_point(), 0.2);
    }

    #[test]
    fn rejects_bad_round_inputs() {
        let mut state = PolicyState::new(2, 0.5).unwrap();
        assert!(matches!(
            state.step_with_uniform(&[0.1], 0.2),
            Err(PolicyError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            state.step_with_uniform(&[1.5, 0.0], 0.2),
            Err(PolicyError::LossOutOfRange(_))
        ));
    }

    #[test]
    fn clip_fault_floors_the_played_point() {
        let mut state = PolicyState::new(2, 0.5).unwrap().with_fault(Fault::ClipProbs(0.2));
        for _ in 0..50 {
            state.step_with_uniform(&[0.0, 1.0], 0.9).unwrap();
        }
        assert!(state.dual().point[1] < 0.2);
        assert!(state.point()[1] > state.dual().point[1]);
    }
}
