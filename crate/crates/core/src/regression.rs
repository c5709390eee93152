//! Straight-line regression: ordinary least squares and a robust variant
//! based on iteratively reweighted least squares with Tukey bisquare weights.

use thiserror::Error;

/// Tukey bisquare tuning constant (95% Gaussian efficiency).
pub const BISQUARE_TUNING: f64 = 4.685;
/// Converts the median absolute deviation into a Gaussian sigma estimate.
pub const MAD_TO_SIGMA: f64 = 1.4826;
pub const MAX_ITERATIONS: usize = 50;
pub const COEF_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("x and y lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("all x values are equal; slope is unidentifiable")]
    DegenerateX,
    #[error("non-finite input at index {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Reweighting passes performed (0 for plain OLS).
    pub iterations: usize,
    pub converged: bool,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<(), RegressionError> {
    if x.len() != y.len() {
        return Err(RegressionError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(RegressionError::TooFewPoints(x.len()));
    }
    if let Some(i) = x
        .iter()
        .zip(y)
        .position(|(a, b)| !a.is_finite() || !b.is_finite())
    {
        return Err(RegressionError::NonFinite(i));
    }
    Ok(())
}

/// Weighted least squares on centred data. Returns `None` when the weighted
/// spread of `x` vanishes.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        let dx = xi - mx;
        sxx += wi * dx * dx;
        sxy += wi * dx * (yi - my);
    }
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if sxx <= f64::EPSILON * scale * scale * sw {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit, RegressionError> {
    check_inputs(x, y)?;
    let w = vec![1.0; x.len()];
    let (intercept, slope) = weighted_line(x, y, &w).ok_or(RegressionError::DegenerateX)?;
    Ok(LineFit {
        intercept,
        slope,
        iterations: 0,
        converged: true,
    })
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Residual scale `1.4826 · median(|r|)`. Regression residuals are
/// deviations from the fitted line, so the deviation is taken about zero
/// rather than about the residual median.
pub fn mad_sigma(residuals: &[f64]) -> f64 {
    let mut dev: Vec<f64> = residuals.iter().map(|v| v.abs()).collect();
    MAD_TO_SIGMA * median(&mut dev)
}

pub fn bisquare_weight(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let t = 1.0 - u * u;
        t * t
    } else {
        0.0
    }
}

/// Robust line fit: starts from OLS, then reweights with Tukey bisquare
/// weights on residuals scaled by `4.685 · 1.4826 · MAD` until both
/// coefficients move less than `1e-8` or 50 passes elapse.
///
/// A zero residual scale means the current line already passes through the
/// bulk of the data exactly; the fit stops there.
pub fn robust_bisquare(x: &[f64], y: &[f64]) -> Result<LineFit, RegressionError> {
    let start = ols(x, y)?;
    let (mut intercept, mut slope) = (start.intercept, start.slope);
    let y_scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut weights = vec![1.0; x.len()];
    let mut residuals = vec![0.0; x.len()];

    for iter in 1..=MAX_ITERATIONS {
        for ((r, xi), yi) in residuals.iter_mut().zip(x).zip(y) {
            *r = yi - (intercept + slope * xi);
        }
        let sigma = mad_sigma(&residuals);
        if sigma <= 1e-12 * y_scale {
            return Ok(LineFit {
                intercept,
                slope,
                iterations: iter - 1,
                converged: true,
            });
        }
        let cutoff = BISQUARE_TUNING * sigma;
        for (w, r) in weights.iter_mut().zip(&residuals) {
            *w = bisquare_weight(r / cutoff);
        }
        let (next_i, next_s) = weighted_line(x, y, &weights).ok_or(RegressionError::DegenerateX)?;
        let delta = (next_i - intercept).abs().max((next_s - slope).abs());
        intercept = next_i;
        slope = next_s;
        if delta < COEF_TOLERANCE {
            return Ok(LineFit {
                intercept,
                slope,
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(LineFit {
        intercept,
        slope,
        iterations: MAX_ITERATIONS,
        converged: false,
    })
}
