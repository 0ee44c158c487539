use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const RUN_ENV_HELP: &str = "Environment:\n  TSALLIS_LAB_THREADS  Worker thread cap [default: one per logical core]";

#[derive(Debug, Parser)]
#[command(
    name = "tsallis-lab",
    version,
    about = "Simulate and audit the 1/2-Tsallis-INF bandit policy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run replicated trajectories and write per-checkpoint aggregates
    #[command(after_help = RUN_ENV_HELP)]
    Run(RunArgs),
    /// Run with per-step lemma checks; exit 3 on any violation
    #[command(after_help = RUN_ENV_HELP)]
    Audit(RunArgs),
    /// Fit a power law to one column of a run CSV
    Fit(FitArgs),
    /// Dump every round of a single trajectory
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// key=value file with defaults for the flags below (flags win)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Comma-separated expected loss per arm, each in [0,1]
    #[arg(long, value_name = "LIST")]
    pub means: Option<String>,

    /// Per-arm loss distribution: `bernoulli` or `uniform:<width>` [default: bernoulli]
    #[arg(long, value_name = "KIND")]
    pub arm_kind: Option<String>,

    /// Learning-rate scale, eta_t = alpha / sqrt(t) [default: 0.5]
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Accept alpha >= 1 (experimental; outside the convergence guarantee)
    #[arg(long)]
    pub allow_unstable_alpha: bool,

    /// Rounds per trajectory [default: 100000]
    #[arg(long, value_name = "N")]
    pub horizon: Option<usize>,

    /// Independent replications [default: 1000]
    #[arg(long, value_name = "R")]
    pub reps: Option<usize>,

    /// Master seed for all random streams [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for run.csv and run.meta.toml [default: results]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Log-spaced checkpoints per decade [default: 20]
    #[arg(long, value_name = "K")]
    pub per_decade: Option<usize>,

    /// Rate-fit window LO:HI recorded in the metadata [default: N/100:N]
    #[arg(long, value_name = "LO:HI")]
    pub fit_window: Option<String>,

    /// Enable per-step lemma checks (always on for `audit`)
    #[arg(long)]
    pub audit: bool,

    /// Fault injection for audit sensitivity tests, e.g. `clip-probs=0.01`
    #[arg(long, value_name = "SPEC")]
    pub fault: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Run CSV to read
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Column to fit against t
    #[arg(long, default_value = "mean_bregman")]
    pub column: String,

    /// Fit window LO:HI over t [default: all rows]
    #[arg(long, value_name = "LO:HI")]
    pub window: Option<String>,

    /// Fail (exit 4) unless the fitted slope is at most this value
    #[arg(long, value_name = "SLOPE", allow_hyphen_values = true)]
    pub expect_slope_max: Option<f64>,

    /// Fail (exit 4) unless the fitted slope is at least this value
    #[arg(long, value_name = "SLOPE", allow_hyphen_values = true)]
    pub expect_slope_min: Option<f64>,

    /// Fail (exit 4) unless r^2 is at least this value
    #[arg(long, value_name = "R2")]
    pub expect_r2_min: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    /// Replay table: comma-separated losses, one row per round, no header
    #[arg(long, value_name = "FILE", conflicts_with_all = ["means", "arm_kind"])]
    pub replay: Option<PathBuf>,

    /// Stochastic instance instead of a replay table
    #[arg(long, value_name = "LIST")]
    pub means: Option<String>,

    /// Per-arm loss distribution for --means [default: bernoulli]
    #[arg(long, value_name = "KIND")]
    pub arm_kind: Option<String>,

    /// Seed for arm sampling (and loss draws with --means)
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Rounds to print [default: all replay rows, or 10 with --means]
    #[arg(long, value_name = "N")]
    pub steps: Option<usize>,

    /// Learning-rate scale
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    /// Accept alpha >= 1
    #[arg(long)]
    pub allow_unstable_alpha: bool,

    /// Reference arm (1-based) for the divergence and decomposition columns
    /// [default: optimal arm, or lowest replay column sum]
    #[arg(long, value_name = "ARM")]
    pub star: Option<usize>,
}
