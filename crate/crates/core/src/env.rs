//! Loss generation: stochastic i.i.d. instances and deterministic replay.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::rng::UniformSource;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("an instance needs at least one arm")]
    Empty,
    #[error("mean {value} of arm {} is outside [0, 1]", arm + 1)]
    MeanOutOfRange { arm: usize, value: f64 },
    #[error(
        "the optimal arm must be unique: arms {} and {} share the minimal mean {mean}", first + 1, second + 1
    )]
    NonUniqueOptimum { first: usize, second: usize, mean: f64 },
    #[error("uniform arm width must be in (0, 1], got {0}")]
    InvalidWidth(f64),
    #[error("unknown arm distribution `{0}` (expected `bernoulli` or `uniform:<width>`)")]
    UnknownArmKind(String),
    #[error("round {round} is outside the replay table of {rows} rows")]
    RoundOutOfRange { round: usize, rows: usize },
    #[error("replay line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("replay table is empty")]
    EmptyReplay,
    #[error("loss {value} at arm {} is outside [0, 1]", arm + 1)]
    LossOutOfRange { arm: usize, value: f64 },
    #[error("cannot read replay file: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-arm losses for one round, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EnvError> {
        check_unit_interval(&values)?;
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_unit_interval(values: &[f64]) -> Result<(), EnvError> {
    match values
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        Some((arm, &value)) => Err(EnvError::LossOutOfRange { arm, value }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ArmKind {
    #[default]
    Bernoulli,
    /// Uniform around the mean with the given total width. The half-width
    /// is shrunk near the boundary to `min(width/2, μ, 1-μ)` so the support
    /// stays in `[0, 1]` and the mean stays exactly `μ`.
    Uniform { width: f64 },
}

impl FromStr for ArmKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("bernoulli") {
            return Ok(ArmKind::Bernoulli);
        }
        if let Some(w) = s.strip_prefix("uniform:") {
            let width: f64 = w
                .trim()
                .parse()
                .map_err(|_| EnvError::UnknownArmKind(s.to_string()))?;
            if !(width > 0.0 && width <= 1.0) {
                return Err(EnvError::InvalidWidth(width));
            }
            return Ok(ArmKind::Uniform { width });
        }
        Err(EnvError::UnknownArmKind(s.to_string()))
    }
}

impl fmt::Display for ArmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArmKind::Bernoulli => write!(f, "bernoulli"),
            ArmKind::Uniform { width } => write!(f, "uniform:{width}"),
        }
    }
}

/// Stochastic instance: per-arm expected losses and derived gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    means: Vec<f64>,
    arm_kind: ArmKind,
    star: usize,
    gaps: Vec<f64>,
    min_gap: f64,
}

impl InstanceSpec {
    pub fn new(means: Vec<f64>, arm_kind: ArmKind) -> Result<Self, EnvError> {
        if means.is_empty() {
            return Err(EnvError::Empty);
        }
        if let Some((arm, &value)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(EnvError::MeanOutOfRange { arm, value });
        }
        if let ArmKind::Uniform { width } = arm_kind {
            if !(width > 0.0 && width <= 1.0) {
                return Err(EnvError::InvalidWidth(width));
            }
        }
        let mut star = 0;
        for (i, &m) in means.iter().enumerate().skip(1) {
            if m < means[star] {
                star = i;
            }
        }
        let best = means[star];
        if let Some(second) = means
            .iter()
            .enumerate()
            .position(|(i, &m)| i != star && m == best)
        {
            let (first, second) = (star.min(second), star.max(second));
            return Err(EnvError::NonUniqueOptimum { first, second, mean: best });
        }
        let gaps: Vec<f64> = means.iter().map(|m| m - best).collect();
        let min_gap = gaps
            .iter()
            .copied()
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            means,
            arm_kind,
            star,
            gaps,
            min_gap: if min_gap.is_finite() { min_gap } else { 0.0 },
        })
    }

    pub fn bernoulli(means: Vec<f64>) -> Result<Self, EnvError> {
        Self::new(means, ArmKind::Bernoulli)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn arm_kind(&self) -> ArmKind {
        self.arm_kind
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// The unique optimal arm (0-based).
    pub fn star(&self) -> usize {
        self.star
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Smallest positive gap; zero for a single-arm instance.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }
}

/// Draws one i.i.d. loss vector, consuming exactly one uniform per arm.
pub fn draw_losses(spec: &InstanceSpec, rng: &mut impl UniformSource) -> LossVector {
    let mut out = vec![0.0; spec.dim()];
    draw_losses_into(spec, rng, &mut out);
    LossVector(out)
}

pub fn draw_losses_into(spec: &InstanceSpec, rng: &mut impl UniformSource, out: &mut [f64]) {
    debug_assert_eq!(out.len(), spec.dim());
    match spec.arm_kind {
        ArmKind::Bernoulli => {
            for (slot, &mu) in out.iter_mut().zip(&spec.means) {
                *slot = if rng.next_uniform() < mu { 1.0 } else { 0.0 };
            }
        }
        ArmKind::Uniform { width } => {
            for (slot, &mu) in out.iter_mut().zip(&spec.means) {
                let half = (0.5 * width).min(mu).min(1.0 - mu);
                let u = rng.next_uniform();
                *slot = (mu + half * (2.0 * u - 1.0)).clamp(0.0, 1.0);
            }
        }
    }
}

/// An `n × d` table of losses, one row per round.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayMatrix {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl ReplayMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, EnvError> {
        let dim = rows.first().map(Vec::len).ok_or(EnvError::EmptyReplay)?;
        if dim == 0 {
            return Err(EnvError::EmptyReplay);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(EnvError::Parse {
                    line: i + 1,
                    message: format!("expected {dim} columns, found {}", row.len()),
                });
            }
            check_unit_interval(row).map_err(|e| EnvError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(Self { rows, dim })
    }

    /// Comma-separated text, one row per round, no header. Blank lines are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| EnvError::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|e| EnvError::Parse {
                        line,
                        message: format!("`{field}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(EnvError::Parse {
                        line,
                        message: format!("expected {} columns, found {}", first.len(), row.len()),
                    });
                }
            }
            check_unit_interval(&row).map_err(|e| EnvError::Parse {
                line,
                message: e.to_string(),
            })?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EnvError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-arm column sums.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim];
        for row in &self.rows {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Row for round `t` (1-based).
    pub fn row(&self, t: usize) -> Result<&[f64], EnvError> {
        if t == 0 || t > self.rows.len() {
            return Err(EnvError::RoundOutOfRange {
                round: t,
                rows: self.rows.len(),
            });
        }
        Ok(&self.rows[t - 1])
    }
}

/// Loss vector for round `t` (1-based) of a replay table.
pub fn replay_losses(matrix: &ReplayMatrix, t: usize) -> Result<LossVector, EnvError> {
    matrix.row(t).map(|r| LossVector(r.to_vec()))
}

/// Anything that produces one loss vector per round.
pub trait LossSource {
    fn dim(&self) -> usize;

    /// Writes the losses of round `t` (1-based) into `out`.
    fn fill(&mut self, t: usize, out: &mut [f64]) -> Result<(), EnvError>;
}

/// I.i.d. draws from an [`InstanceSpec`].
#[derive(Debug)]
pub struct StochasticSource<'a, R> {
    spec: &'a InstanceSpec,
    rng: R,
}

impl<'a, R: UniformSource> StochasticSource<'a, R> {
    pub fn new(spec: &'a InstanceSpec, rng: R) -> Self {
        Self { spec, rng }
    }
}

impl<R: UniformSource> LossSource for StochasticSource<'_, R> {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn fill(&mut self, _t: usize, out: &mut [f64]) -> Result<(), EnvError> {
        draw_losses_into(self.spec, &mut self.rng, out);
        Ok(())
    }
}

impl LossSource for &ReplayMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn fill(&mut self, t: usize, out: &mut [f64]) -> Result<(), EnvError> {
        out.copy_from_slice(self.row(t)?);
        Ok(())
    }
}
