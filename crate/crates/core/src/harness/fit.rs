//! Power-law fits in log-log space.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 3 positive points in the window, found {usable} ({excluded} nonpositive excluded)")]
    TooFewPoints { usable: usize, excluded: usize },
    #[error("no point at t = {0}")]
    MissingEndpoint(f64),
    #[error("value at t = {0} is not positive")]
    NonPositiveEndpoint(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Empirical exponent.
    pub slope: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    /// Points inside the window dropped for being nonpositive.
    pub excluded: usize,
}

/// Least squares of `ln y` on `ln t` over points with `t` in `[lo, hi]`.
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit, FitError> {
    let (lo, hi) = window;
    let mut excluded = 0;
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .filter_map(|&(t, y)| {
            if y > 0.0 && y.is_finite() && t > 0.0 {
                Some((t.ln(), y.ln()))
            } else {
                excluded += 1;
                None
            }
        })
        .collect();
    if logs.len() < 3 {
        return Err(FitError::TooFewPoints {
            usable: logs.len(),
            excluded,
        });
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &logs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(FitError::TooFewPoints {
            usable: 1,
            excluded,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    // A constant series is fit exactly by slope 0.
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        used: logs.len(),
        excluded,
    })
}

/// Hypothesized growth used to normalize [`growth_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Flat,
    Linear,
}

impl Growth {
    fn scale(self, t: f64) -> f64 {
        match self {
            Growth::Flat => 1.0,
            Growth::Linear => t,
        }
    }
}

/// `(y(t_hi) / g(t_hi)) / (y(t_lo) / g(t_lo))`; 1 when the data follow `g`.
pub fn growth_ratio(
    points: &[(f64, f64)],
    t_lo: f64,
    t_hi: f64,
    growth: Growth,
) -> Result<f64, FitError> {
    let at = |t: f64| {
        points
            .iter()
            .find(|p| p.0 == t)
            .map(|p| p.1)
            .ok_or(FitError::MissingEndpoint(t))
    };
    let lo = at(t_lo)?;
    let hi = at(t_hi)?;
    if !(lo > 0.0) {
        return Err(FitError::NonPositiveEndpoint(t_lo));
    }
    Ok((hi / growth.scale(t_hi)) / (lo / growth.scale(t_lo)))
}
