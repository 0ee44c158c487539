use std::path::PathBuf;

use tsallis_core::harness::{checkpoints, output, HarnessError, CHECKPOINTS_PER_DECADE};
use tsallis_core::policy::Fault;
use tsallis_core::{run_experiment, CheckpointStats, RunConfig, RunResult};

use super::{build_instance, parse_window};
use crate::args::RunArgs;
use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};

pub const THREADS_ENV: &str = "TSALLIS_LAB_THREADS";

const DEFAULT_ALPHA: f64 = 0.5;
const DEFAULT_HORIZON: usize = 100_000;
const DEFAULT_REPS: usize = 1000;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_OUT: &str = "results";

fn parse_fault(text: &str) -> CliResult<Fault> {
    let bad = || CliError::Config(format!("bad fault `{text}`, expected clip-probs=<floor>"));
    let (name, value) = text.split_once('=').ok_or_else(bad)?;
    if name.trim() != "clip-probs" {
        return Err(bad());
    }
    let floor: f64 = value.trim().parse().map_err(|_| bad())?;
    if !(floor > 0.0 && floor < 1.0) {
        return Err(bad());
    }
    Ok(Fault::ClipProbs(floor))
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Merges flags, config file and defaults (in that order of precedence).
pub fn resolve(args: &RunArgs, force_audit: bool) -> CliResult<RunConfig> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };

    let means = args
        .means
        .clone()
        .or_else(|| file.get("means").map(str::to_string))
        .ok_or_else(|| CliError::Config("--means is required (flag or config file)".into()))?;
    let arm_kind = args.arm_kind.clone().or_else(|| file.get("arm-kind").map(str::to_string));
    let instance = build_instance(&means, arm_kind.as_deref())?;

    let alpha = match args.alpha {
        Some(a) => a,
        None => file.parsed("alpha")?.unwrap_or(DEFAULT_ALPHA),
    };
    let horizon = match args.horizon {
        Some(n) => n,
        None => file.parsed("horizon")?.unwrap_or(DEFAULT_HORIZON),
    };
    let reps = match args.reps {
        Some(r) => r,
        None => file.parsed("reps")?.unwrap_or(DEFAULT_REPS),
    };
    let seed = match args.seed {
        Some(s) => s,
        None => file.parsed("seed")?.unwrap_or(DEFAULT_SEED),
    };
    let per_decade = match args.per_decade {
        Some(k) => k,
        None => file.parsed("per-decade")?.unwrap_or(CHECKPOINTS_PER_DECADE),
    };
    let out = args
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let fit_window = match args.fit_window.as_deref().or(file.get("fit-window")) {
        Some(w) => Some(parse_window(w)?),
        None => None,
    };
    let fault = match args.fault.as_deref().or(file.get("fault")) {
        Some(f) => Some(parse_fault(f)?),
        None => None,
    };
    let allow_unstable =
        args.allow_unstable_alpha || file.parsed("allow-unstable-alpha")?.unwrap_or(false);
    let audit = force_audit || args.audit || file.parsed("audit")?.unwrap_or(false);

    if horizon < 1 {
        return Err(CliError::Config("--horizon must be at least 1".into()));
    }
    if per_decade < 1 {
        return Err(CliError::Config("--per-decade must be at least 1".into()));
    }

    let mut config = RunConfig::new(instance, alpha, horizon, reps, seed);
    config.allow_unstable_alpha = allow_unstable;
    config.checkpoints = checkpoints::log_spaced(horizon, per_decade);
    config.audit = audit;
    config.fault = fault;
    config.threads = threads_from_env()?;
    config.fit_window = fit_window;
    config.output = Some(out);
    config.revision = Some(env!("TSALLIS_LAB_GIT_DESCRIBE").to_string());
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn execute(config: &RunConfig) -> CliResult<RunResult> {
    run_experiment(config).map_err(|e| match e {
        HarnessError::Config(m) => CliError::Config(m),
        other => CliError::Runtime(other.to_string()),
    })
}

fn is_summary_row(t: usize, horizon: usize) -> bool {
    let mut k = t;
    while k >= 10 && k.is_multiple_of(10) {
        k /= 10;
    }
    k == 1 || t == horizon
}

fn print_summary(stats: &[CheckpointStats], horizon: usize) {
    println!(
        "{:>9}  {:>12}  {:>10}  {:>12}  {:>12}  {:>7}",
        "t", "D_psi", "se", "simple_reg", "pseudo_reg", "P(A_t)"
    );
    for s in stats.iter().filter(|s| is_summary_row(s.t, horizon)) {
        println!(
            "{:>9}  {:>12.5e}  {:>10.2e}  {:>12.5e}  {:>12.5e}  {:>7.4}",
            s.t,
            s.bregman.mean,
            s.bregman.se,
            s.simple_regret.mean,
            s.pseudo_regret.mean,
            s.prob_event_a
        );
    }
}

fn report_output(config: &RunConfig) {
    if let Some(dir) = &config.output {
        println!(
            "wrote {} and {}",
            dir.join(output::CSV_FILE).display(),
            dir.join(output::METADATA_FILE).display()
        );
    }
}

pub fn cmd_run(args: &RunArgs) -> CliResult {
    let config = resolve(args, false)?;
    let result = execute(&config)?;
    print_summary(&result.checkpoints, config.horizon);
    report_output(&config);
    if config.audit {
        return finish_audit(&result);
    }
    Ok(())
}

pub fn cmd_audit(args: &RunArgs) -> CliResult {
    let config = resolve(args, true)?;
    let result = execute(&config)?;
    report_output(&config);
    finish_audit(&result)
}

fn finish_audit(result: &RunResult) -> CliResult {
    let audit = &result.audit;
    for v in &audit.log {
        let w = &v.violation;
        let arm = w.arm.map(|a| (a + 1).to_string()).unwrap_or_else(|| "-".into());
        println!(
            "violation round={} replication={} lemma={} arm={} lhs={:.17e} rhs={:.17e}",
            w.round,
            v.replication,
            w.lemma,
            arm,
            w.lhs,
            w.rhs
        );
    }
    if audit.violations as usize > audit.log.len() {
        println!("... {} more not shown", audit.violations as usize - audit.log.len());
    }
    println!("audit: {} checks, {} violations", audit.checks, audit.violations);
    if audit.is_clean() {
        Ok(())
    } else {
        Err(CliError::Violations(audit.violations))
    }
}
