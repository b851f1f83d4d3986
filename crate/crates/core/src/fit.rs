//! Least-squares fits of decay exponents on log-log axes.

use serde::Serialize;

use crate::error::{CoreError, Result};

/// Result of regressing ln|y| on ln n.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawFit {
    /// Fitted exponent: y ≈ e^intercept · n^slope.
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 when the fit is exact).
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Points excluded because |y| = 0 or not finite (log undefined).
    pub points_dropped: usize,
}

/// Fit ln|y| = intercept + slope · ln n over `(n, y)` points.
///
/// Points with y = 0 (or non-finite y) carry no log-scale information and
/// are dropped but counted; fewer than 3 usable points is an error.
pub fn fit_log_decay(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    let mut dropped = 0usize;
    for &(n, y) in points {
        if !(n.is_finite() && n > 0.0) {
            return Err(CoreError::invalid(format!(
                "abscissa must be positive and finite, got {n}"
            )));
        }
        if y == 0.0 || !y.is_finite() {
            dropped += 1;
            continue;
        }
        xs.push(n.ln());
        ys.push(y.abs().ln());
    }
    let m = xs.len();
    if m < 3 {
        return Err(CoreError::InsufficientData(format!(
            "log-decay fit needs at least 3 nonzero points, have {m} ({dropped} dropped)"
        )));
    }

    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..m {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(CoreError::InsufficientData(
            "log-decay fit needs at least two distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let mut ssr = 0.0;
    for i in 0..m {
        let resid = ys[i] - (intercept + slope * xs[i]);
        ssr += resid * resid;
    }
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let slope_stderr = if m > 2 {
        (ssr / (m as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };

    Ok(PowerLawFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points_used: m,
        points_dropped: dropped,
    })
}
