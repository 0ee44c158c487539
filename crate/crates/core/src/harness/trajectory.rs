use crate::env::{LossSource, StochasticSource};
use crate::ftrl::{bregman_to_vertex, solve_ftrl, ScaledLosses};
use crate::metrics::{
    check_compare, check_concentration_event, check_decomposition,
    check_learning_rate_continuity, check_sandwich, check_underline_split, decomposition_residual,
    simple_regret, RegretState, Violation,
};
use crate::policy::{empirical_argmin, PolicyError, PolicyState};
use crate::rng::{RngStream, StreamPurpose};

use super::aggregate::CheckpointSample;
use super::RunConfig;

/// A lemma violation tagged with the replication it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditViolation {
    pub replication: u64,
    pub violation: Violation,
}

/// Counts of audit checks, plus the first few violations verbatim.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub checks: u64,
    pub violations: u64,
    pub log: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    pub(crate) fn absorb(&mut self, other: AuditReport, cap: usize) {
        self.checks += other.checks;
        self.violations += other.violations;
        let room = cap.saturating_sub(self.log.len());
        self.log.extend(other.log.into_iter().take(room));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    pub samples: Vec<CheckpointSample>,
    pub audit: AuditReport,
}

fn initial_state(config: &RunConfig) -> Result<PolicyState, PolicyError> {
    let d = config.instance.dim();
    let state = if config.allow_unstable_alpha {
        PolicyState::with_unstable_alpha(d, config.alpha)?
    } else {
        PolicyState::new(d, config.alpha)?
    };
    Ok(match config.fault {
        Some(fault) => state.with_fault(fault),
        None => state,
    })
}

/// Runs replication `replication` of `config` to its horizon.
pub fn run_trajectory(config: &RunConfig, replication: u64) -> Result<TrajectoryOutcome, PolicyError> {
    let spec = &config.instance;
    let d = spec.dim();
    let star = spec.star();
    let gaps = spec.gaps();
    let solver_err = |round: usize| move |source| PolicyError::Solver { round, source };

    let mut state = initial_state(config)?;
    let mut regret = RegretState::new(d);
    let mut env = StochasticSource::new(
        spec,
        RngStream::new(config.master_seed, replication, StreamPurpose::Environment),
    );
    let mut arms = RngStream::new(config.master_seed, replication, StreamPurpose::ArmSampling);

    let mut losses = vec![0.0; d];
    let mut samples = Vec::with_capacity(config.checkpoints.len());
    let mut next_checkpoint = config.checkpoints.iter().copied().peekable();
    let mut audit = AuditReport::default();
    let mut found: Vec<Violation> = Vec::new();

    for t in 1..=config.horizon {
        let at_checkpoint = next_checkpoint.peek() == Some(&t);
        let cumulative_t = (config.audit || at_checkpoint).then(|| state.cumulative().to_vec());

        if config.audit {
            let cum = cumulative_t.as_deref().expect("snapshot taken when auditing");
            let scaled = ScaledLosses::from_cumulative(state.eta(), cum).map_err(solver_err(t))?;
            check_sandwich(state.point(), &scaled, t, &mut found);
            check_concentration_event(state.point(), cum, star, t, &mut found);
            check_underline_split(cum, star, &regret, t, &mut found);
            audit.checks += d as u64 + 2;
        }

        env.fill(t, &mut losses).expect("stochastic sources do not fail");
        let eta_t = state.eta();
        let record = state.step(&losses, &mut arms)?;
        regret.record(&record, &losses, Some(gaps));

        if config.audit {
            let cum = cumulative_t.as_deref().expect("snapshot taken when auditing");
            let next = state.point();
            let residual = decomposition_residual(&record, next, eta_t, state.eta(), cum, star);
            check_decomposition(residual, t, &mut found);
            check_compare(&record.p, next, d, t, &mut found);
            let intermediate = solve_ftrl(eta_t, state.cumulative()).map_err(solver_err(t))?;
            check_learning_rate_continuity(&state.dual().point, &intermediate.point, t, &mut found);
            audit.checks += 2 * d as u64 + 1;

            if !found.is_empty() {
                audit.violations += found.len() as u64;
                let room = config.violation_log_cap.saturating_sub(audit.log.len());
                audit.log.extend(found.iter().take(room).map(|&violation| AuditViolation {
                    replication,
                    violation,
                }));
                found.clear();
            }
        }

        if at_checkpoint {
            next_checkpoint.next();
            let cum = cumulative_t.as_deref().expect("snapshot taken at checkpoints");
            samples.push(CheckpointSample {
                t,
                bregman: bregman_to_vertex(&record.p, star),
                simple_regret: simple_regret(&record.p, spec),
                pseudo_regret: regret.pseudo_regret,
                rhat_plus: regret.estimated_regret().max(0.0),
                u_plus: regret.u_statistic(star).max(0.0),
                event_a: empirical_argmin(cum) == star,
                probs: record.p.probs().to_vec(),
            });
        }
    }

    Ok(TrajectoryOutcome { samples, audit })
}
