//! Tsallis regularizer, its Bregman divergence, and the exact FTRL solver.
//!
//! The regularizer is `Ψ(p) = -4 Σ √p_i`. For a loss vector `L` and
//! learning rate `η`, the FTRL iterate `argmin_p η⟨p, L⟩ + Ψ(p)` over the
//! simplex has the closed form `p_i = 4 (η L̲_i + ν)^-2`, where `L̲` is `L`
//! shifted so that its minimum is zero and `ν ∈ [2, 2√d]` is the unique
//! root of `Σ_i 4 (η L̲_i + ν)^-2 = 1`.

use std::fmt;

use thiserror::Error;

/// Largest tolerated `|Σ p_i - 1|` for a [`SimplexPoint`].
pub const SUM_TOLERANCE: f64 = 1e-10;

/// Termination threshold on `|g(ν)|` for the dual root-finder.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Iteration cap for the dual root-finder.
pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("a simplex point needs at least one coordinate")]
    Empty,
    #[error("probability {value} at arm {index} is not strictly positive and finite")]
    NotPositive { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("cannot solve over an empty arm set")]
    Empty,
    #[error("learning rate must be positive and finite, got {0}")]
    InvalidLearningRate(f64),
    #[error("cumulative loss at arm {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("dual root-finder did not converge after {iterations} iterations (|g| = {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("probability of arm {index} underflowed to zero")]
    Underflow { index: usize },
}

/// A strictly positive probability vector over `d ≥ 1` arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(probs: Vec<f64>) -> Result<Self, SimplexError> {
        if probs.is_empty() {
            return Err(SimplexError::Empty);
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(SimplexError::NotPositive { index, value });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(SimplexError::NotNormalized { sum });
        }
        Ok(Self(probs))
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d >= 1, "uniform point needs d >= 1");
        Self(vec![1.0 / d as f64; d])
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Index of the largest coordinate (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for SimplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p:.6}")?;
        }
        write!(f, ")")
    }
}

/// Learning-rate-scaled losses after the underline reduction: all entries
/// finite, nonnegative, and the minimum is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLosses(Vec<f64>);

impl ScaledLosses {
    /// `η · (L - min L)`.
    pub fn from_cumulative(eta: f64, cumulative: &[f64]) -> Result<Self, SolverError> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(SolverError::InvalidLearningRate(eta));
        }
        check_finite(cumulative)?;
        let mut values = underline(cumulative).0;
        for v in &mut values {
            *v *= eta;
        }
        Ok(Self(values))
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Result of the dual root-finding.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub point: SimplexPoint,
    /// Dual parameter after the underline reduction; lies in `[2, 2√d]`.
    pub nu: f64,
    /// `|Σ p_i - 1|` of the returned point.
    pub residual: f64,
    pub iterations: usize,
}

fn check_finite(values: &[f64]) -> Result<(), SolverError> {
    if values.is_empty() {
        return Err(SolverError::Empty);
    }
    match values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        Some((index, &value)) => Err(SolverError::NonFinite { index, value }),
        None => Ok(()),
    }
}

/// Shifts `values` so that the minimum entry becomes exactly zero.
///
/// Panics if `values` is empty.
pub fn underline(values: &[f64]) -> ScaledLosses {
    let min = values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert!(min.is_finite(), "underline needs a nonempty finite vector");
    ScaledLosses(values.iter().map(|v| v - min).collect())
}

/// `Ψ(p) = -4 Σ √p_i`.
pub fn tsallis_potential(p: &SimplexPoint) -> f64 {
    potential(p.probs())
}

/// `Ψ` on the closed simplex (zero coordinates allowed).
pub fn potential(p: &[f64]) -> f64 {
    -4.0 * p.iter().map(|x| x.sqrt()).sum::<f64>()
}

/// `∇Ψ(p)_i = -2 / √p_i`.
pub fn potential_gradient(p: &SimplexPoint) -> Vec<f64> {
    p.probs().iter().map(|x| -2.0 / x.sqrt()).collect()
}

/// `D_Ψ(x, y) = Ψ(x) - Ψ(y) - ⟨x - y, ∇Ψ(y)⟩`.
///
/// `x` may lie on the boundary of the simplex. Evaluated per coordinate as
/// `2 (√x_i - √y_i)^2 / √y_i`, which is the same sum without the
/// cancellation between the three terms.
pub fn bregman(x: &[f64], y: &SimplexPoint) -> f64 {
    assert_eq!(x.len(), y.dim(), "dimension mismatch");
    x.iter()
        .zip(y.probs())
        .map(|(&xi, &yi)| {
            let sy = yi.sqrt();
            let diff = xi.sqrt() - sy;
            2.0 * diff * diff / sy
        })
        .sum()
}

/// `D_Ψ(e_star, p) = 2 Σ_{i≠star} √p_i + 2 (1 - √p_star)^2 / √p_star`.
pub fn bregman_to_vertex(p: &SimplexPoint, star: usize) -> f64 {
    let probs = p.probs();
    assert!(star < probs.len(), "arm index out of range");
    let mut others_sqrt = 0.0;
    let mut others_mass = 0.0;
    for (i, &pi) in probs.iter().enumerate() {
        if i != star {
            others_sqrt += pi.sqrt();
            others_mass += pi;
        }
    }
    let root = probs[star].sqrt();
    // 1 - √p* = (1 - p*) / (1 + √p*), with 1 - p* taken from the other arms
    let gap = others_mass / (1.0 + root);
    2.0 * others_sqrt + 2.0 * gap * gap / root
}

/// FTRL iterate `argmin_p η⟨p, L⟩ + Ψ(p)` over the simplex.
pub fn solve_ftrl(eta: f64, cumulative: &[f64]) -> Result<DualSolution, SolverError> {
    let scaled = ScaledLosses::from_cumulative(eta, cumulative)?;
    solve_scaled(&scaled)
}

/// `φ(λ) = argmax_p ⟨p, λ⟩ - Ψ(p)`, i.e. the FTRL iterate for losses `-λ`
/// at unit learning rate.
pub fn mirror_map(lambda: &[f64]) -> Result<SimplexPoint, SolverError> {
    let neg: Vec<f64> = lambda.iter().map(|v| -v).collect();
    solve_ftrl(1.0, &neg).map(|s| s.point)
}

/// Safeguarded Newton on `g(ν) = Σ 4 (x_i + ν)^-2 - 1` over the bracket
/// `[2, 2√d]`, falling back to bisection whenever a Newton step leaves it.
pub fn solve_scaled(scaled: &ScaledLosses) -> Result<DualSolution, SolverError> {
    let x = scaled.values();
    let d = x.len();
    if d == 0 {
        return Err(SolverError::Empty);
    }
    if d == 1 {
        return Ok(DualSolution {
            point: SimplexPoint(vec![1.0]),
            nu: 2.0,
            residual: 0.0,
            iterations: 0,
        });
    }

    let mut lo = 2.0;
    let mut hi = 2.0 * (d as f64).sqrt();
    let mut nu = lo;
    let mut last_g = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let (g, slope) = dual_residual(x, nu);
        last_g = g;
        if g.abs() <= ROOT_TOLERANCE {
            // one more Newton step takes the quadratic tail to rounding level
            let polished = nu - g / slope;
            if polished >= lo && polished <= hi && dual_residual(x, polished).0.abs() <= g.abs() {
                nu = polished;
            }
            return finish(x, nu, iteration);
        }
        if g > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        let newton = nu - g / slope;
        nu = if newton > lo && newton <= hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(SolverError::NonConvergence {
        iterations: MAX_ITERATIONS,
        residual: last_g.abs(),
    })
}

#[inline]
fn dual_residual(x: &[f64], nu: f64) -> (f64, f64) {
    let mut g = -1.0;
    let mut slope = 0.0;
    for &xi in x {
        let inv = 1.0 / (xi + nu);
        let p = 4.0 * inv * inv;
        g += p;
        slope -= 2.0 * p * inv;
    }
    (g, slope)
}

fn finish(x: &[f64], nu: f64, iterations: usize) -> Result<DualSolution, SolverError> {
    let mut probs = Vec::with_capacity(x.len());
    for (index, &xi) in x.iter().enumerate() {
        let inv = 1.0 / (xi + nu);
        let p = 4.0 * inv * inv;
        if p <= 0.0 {
            return Err(SolverError::Underflow { index });
        }
        probs.push(p);
    }
    let residual = (probs.iter().sum::<f64>() - 1.0).abs();
    Ok(DualSolution {
        point: SimplexPoint(probs),
        nu,
        residual,
        iterations,
    })
}
