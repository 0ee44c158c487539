//! Run CSV and metadata sidecar.
//!
//! The CSV has one row per checkpoint. Floats are written with 17
//! significant digits so that a reload reproduces them bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::fit::fit_power_law;
use super::{CheckpointStats, HarnessError, RunConfig, RunResult};

pub const CSV_FILE: &str = "run.csv";
pub const METADATA_FILE: &str = "run.meta.toml";

const FIXED_COLUMNS: [&str; 15] = [
    "t",
    "n_reps",
    "mean_bregman",
    "se_bregman",
    "mean_bregman_sq",
    "se_bregman_sq",
    "mean_simple_regret",
    "se_simple_regret",
    "mean_pseudo_regret",
    "se_pseudo_regret",
    "mean_rhat_plus_sq",
    "se_rhat_plus_sq",
    "mean_u_plus_sq",
    "se_u_plus_sq",
    "prob_event_A",
];

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column names for `d` arms (arms numbered from 1).
pub fn csv_columns(d: usize) -> Vec<String> {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend((1..=d).map(|i| format!("mean_p_{i}")));
    cols.extend((1..=d).map(|i| format!("mean_sqrt_p_{i}")));
    cols
}

pub fn render_csv(stats: &[CheckpointStats]) -> String {
    let d = stats.first().map_or(0, |s| s.mean_p.len());
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(csv_columns(d)).expect("in-memory write");
    for s in stats {
        let mut record = vec![s.t.to_string(), s.n_reps.to_string()];
        for m in [
            s.bregman,
            s.bregman_sq,
            s.simple_regret,
            s.pseudo_regret,
            s.rhat_plus_sq,
            s.u_plus_sq,
        ] {
            record.push(format_float(m.mean));
            record.push(format_float(m.se));
        }
        record.push(format_float(s.prob_event_a));
        record.extend(s.mean_p.iter().chain(&s.mean_sqrt_p).map(|v| format_float(*v)));
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ASCII output")
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("CSV is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no column named `{0}`")]
    MissingColumn(String),
}

/// A numeric CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, CsvError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let malformed = |e: csv::Error| CsvError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        };
        let columns: Vec<String> =
            reader.headers().map_err(malformed)?.iter().map(str::to_string).collect();
        if columns.iter().all(String::is_empty) {
            return Err(CsvError::Empty);
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(malformed)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|e| CsvError::Malformed {
                        line,
                        message: format!("`{f}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CsvError> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CsvError::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// `(t, value)` pairs for `name`.
    pub fn points(&self, name: &str) -> Result<Vec<(f64, f64)>, CsvError> {
        let t = self.column("t")?;
        Ok(t.into_iter().zip(self.column(name)?).collect())
    }
}

/// `(t, value)` pairs straight from aggregated stats.
pub fn points(stats: &[CheckpointStats], value: impl Fn(&CheckpointStats) -> f64) -> Vec<(f64, f64)> {
    stats.iter().map(|s| (s.t as f64, value(s))).collect()
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    means: Vec<f64>,
    arm_kind: String,
    optimal_arm: usize,
    alpha: f64,
    allow_unstable_alpha: bool,
    horizon: usize,
    replications: usize,
    master_seed: u64,
    checkpoints: usize,
    audit: bool,
    fault: Option<String>,
}

#[derive(Debug, Serialize)]
struct FitEcho {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    points_used: usize,
    points_excluded: usize,
}

#[derive(Debug, Serialize)]
struct AuditEcho {
    checks: u64,
    violations: u64,
}

#[derive(Debug, Serialize)]
struct Metadata {
    tool_version: String,
    git_describe: String,
    wall_time_seconds: f64,
    config: ConfigEcho,
    fit_window: [f64; 2],
    fits: BTreeMap<String, FitEcho>,
    fit_errors: BTreeMap<String, String>,
    audit: Option<AuditEcho>,
}

pub fn render_metadata(result: &RunResult, config: &RunConfig) -> Result<String, HarnessError> {
    let (lo, hi) = config.effective_fit_window();
    let star = config.instance.star();
    let mut targets: Vec<(String, Vec<(f64, f64)>)> = vec![
        ("mean_bregman".into(), points(&result.checkpoints, |s| s.bregman.mean)),
        ("mean_bregman_sq".into(), points(&result.checkpoints, |s| s.bregman_sq.mean)),
        ("mean_simple_regret".into(), points(&result.checkpoints, |s| s.simple_regret.mean)),
        ("mean_rhat_plus_sq".into(), points(&result.checkpoints, |s| s.rhat_plus_sq.mean)),
    ];
    for i in (0..config.instance.dim()).filter(|&i| i != star) {
        targets.push((format!("mean_p_{}", i + 1), points(&result.checkpoints, |s| s.mean_p[i])));
        targets.push((
            format!("mean_sqrt_p_{}", i + 1),
            points(&result.checkpoints, |s| s.mean_sqrt_p[i]),
        ));
    }
    let mut fits = BTreeMap::new();
    let mut fit_errors = BTreeMap::new();
    for (name, pts) in targets {
        match fit_power_law(&pts, (lo, hi)) {
            Ok(f) => {
                fits.insert(
                    name,
                    FitEcho {
                        slope: f.slope,
                        intercept: f.intercept,
                        r_squared: f.r_squared,
                        points_used: f.used,
                        points_excluded: f.excluded,
                    },
                );
            }
            Err(e) => {
                fit_errors.insert(name, e.to_string());
            }
        }
    }

    let meta = Metadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        git_describe: config.revision.clone().unwrap_or_else(|| "unknown".into()),
        wall_time_seconds: result.wall_time.as_secs_f64(),
        config: ConfigEcho {
            means: config.instance.means().to_vec(),
            arm_kind: config.instance.arm_kind().to_string(),
            optimal_arm: star + 1,
            alpha: config.alpha,
            allow_unstable_alpha: config.allow_unstable_alpha,
            horizon: config.horizon,
            replications: config.replications,
            master_seed: config.master_seed,
            checkpoints: config.checkpoints.len(),
            audit: config.audit,
            fault: config.fault.map(|f| format!("{f:?}")),
        },
        fit_window: [lo, hi],
        fits,
        fit_errors,
        audit: config.audit.then_some(AuditEcho {
            checks: result.audit.checks,
            violations: result.audit.violations,
        }),
    };
    toml::to_string_pretty(&meta).map_err(|e| HarnessError::Metadata(e.to_string()))
}

/// Writes `run.csv` and `run.meta.toml` into `dir`, creating it if needed.
pub fn persist(
    result: &RunResult,
    config: &RunConfig,
    dir: &Path,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(CSV_FILE);
    let meta = dir.join(METADATA_FILE);
    fs::write(&csv, render_csv(&result.checkpoints))?;
    fs::write(&meta, render_metadata(result, config)?)?;
    Ok((csv, meta))
}
