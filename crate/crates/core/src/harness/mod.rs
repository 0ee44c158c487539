//! Replicated Monte-Carlo runs, checkpoint aggregation, rate fitting and
//! persistence.
//!
//! Replications run in parallel on a dedicated rayon pool; each owns its
//! random streams and results are reduced in replication order, so output
//! does not depend on the number of worker threads.

pub mod aggregate;
pub mod checkpoints;
pub mod fit;
pub mod output;
pub mod trajectory;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::env::InstanceSpec;
use crate::policy::{validate_alpha, Fault, PolicyError};

pub use aggregate::{CheckpointSample, CheckpointStats, MeanSe};
pub use fit::{fit_power_law, growth_ratio, FitError, Growth, PowerLawFit};
pub use trajectory::{run_trajectory, AuditReport, AuditViolation, TrajectoryOutcome};

/// Default checkpoint density for rate fitting.
pub const CHECKPOINTS_PER_DECADE: usize = 20;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("replication {replication} (master seed {master_seed}) failed: {source}")]
    Replication {
        replication: u64,
        master_seed: u64,
        #[source]
        source: PolicyError,
    },
    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize metadata: {0}")]
    Metadata(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub alpha: f64,
    pub allow_unstable_alpha: bool,
    pub horizon: usize,
    pub replications: usize,
    pub master_seed: u64,
    /// Strictly increasing rounds in `[1, horizon]`.
    pub checkpoints: Vec<usize>,
    /// Per-step lemma checks.
    pub audit: bool,
    pub fault: Option<Fault>,
    /// Worker threads; `None` uses one per logical core.
    pub threads: Option<usize>,
    /// Window for the rate fits stored in the metadata; defaults to the
    /// last two decades.
    pub fit_window: Option<(f64, f64)>,
    /// Where to persist CSV and metadata, if anywhere.
    pub output: Option<PathBuf>,
    /// Revision string echoed into the metadata.
    pub revision: Option<String>,
    /// Number of violations kept verbatim in the audit report.
    pub violation_log_cap: usize,
}

impl RunConfig {
    pub fn new(
        instance: InstanceSpec,
        alpha: f64,
        horizon: usize,
        replications: usize,
        master_seed: u64,
    ) -> Self {
        let checkpoints = if horizon >= 1 {
            checkpoints::log_spaced(horizon, CHECKPOINTS_PER_DECADE)
        } else {
            Vec::new()
        };
        Self {
            instance,
            alpha,
            allow_unstable_alpha: false,
            horizon,
            replications,
            master_seed,
            checkpoints,
            audit: false,
            fault: None,
            threads: None,
            fit_window: None,
            output: None,
            revision: None,
            violation_log_cap: 200,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.horizon < 1 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(HarnessError::Config("need at least one replication".into()));
        }
        if !checkpoints::validate(&self.checkpoints, self.horizon) {
            return Err(HarnessError::Config(
                "checkpoints must be strictly increasing rounds within [1, horizon]".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("thread count must be positive".into()));
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo > 0.0 && lo < hi) {
                return Err(HarnessError::Config(format!("bad fit window {lo}:{hi}")));
            }
        }
        validate_alpha(self.alpha, self.allow_unstable_alpha)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn effective_fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or_else(|| {
            let n = self.horizon as f64;
            ((n / 100.0).max(1.0), n)
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub checkpoints: Vec<CheckpointStats>,
    pub audit: AuditReport,
    pub wall_time: Duration,
}

/// Runs every replication and aggregates per checkpoint. When
/// `config.output` is set, results are also written there.
pub fn run_experiment(config: &RunConfig) -> Result<RunResult, HarnessError> {
    config.validate()?;
    let started = Instant::now();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    let outcomes: Vec<Result<TrajectoryOutcome, PolicyError>> = pool.install(|| {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|r| run_trajectory(config, r))
            .collect()
    });

    let mut samples = Vec::with_capacity(outcomes.len());
    let mut audit = AuditReport::default();
    for (replication, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome.map_err(|source| HarnessError::Replication {
            replication: replication as u64,
            master_seed: config.master_seed,
            source,
        })?;
        audit.absorb(outcome.audit, config.violation_log_cap);
        samples.push(outcome.samples);
    }

    let result = RunResult {
        checkpoints: aggregate::aggregate(&samples),
        audit,
        wall_time: started.elapsed(),
    };
    if let Some(dir) = &config.output {
        output::persist(&result, config, dir)?;
    }
    Ok(result)
}
