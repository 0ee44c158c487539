//! Simulation and verification lab for the 1/2-Tsallis-INF bandit policy.
//!
//! * [`ftrl`]: regularizer, Bregman divergence and the exact FTRL solver.
//! * [`env`]: stochastic and replayed loss sources.
//! * [`policy`]: the policy itself, round by round.
//! * [`metrics`]: last-iterate diagnostics and lemma checks.
//! * [`harness`]: replicated runs, aggregation, rate fits, CSV output.

pub mod env;
pub mod ftrl;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod rng;

pub use env::{ArmKind, InstanceSpec, LossVector, ReplayMatrix};
pub use ftrl::{
    bregman, bregman_to_vertex, potential_gradient, solve_ftrl, tsallis_potential, underline,
    DualSolution, ScaledLosses, SimplexPoint,
};
pub use harness::{run_experiment, CheckpointStats, RunConfig, RunResult};
pub use metrics::{RegretState, StepDiagnostics, Violation};
pub use policy::{PolicyState, StepRecord};
pub use rng::{RngStream, StreamPurpose, UniformSource};
