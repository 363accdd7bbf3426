//! Least-squares fits of convergence rates.

use crate::error::{Error, Result};

/// Log-log fit of mean excess risk against the budget.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub log_budgets: Vec<f64>,
    pub log_excess: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Budgets dropped because their mean excess was not positive.
    pub dropped: Vec<f64>,
}

/// Semi-log fit of `log₂(excess)` against the epoch index.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Change in `log₂(excess)` per epoch.
    pub slope: f64,
    pub intercept: f64,
    /// Number of leading epochs above the plateau threshold.
    pub epochs_used: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`, returning
/// `(slope, intercept, r²)`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - residual / syy } else { 1.0 };
    if !slope.is_finite() {
        return Err(Error::NonFinite("fitted slope"));
    }
    Ok((slope, intercept, r_squared))
}

/// Fits `ln(mean excess) = slope·ln T + intercept`.
///
/// Points with nonpositive excess are dropped and listed in
/// [`RateFit::dropped`]; fewer than three remaining points is an error.
pub fn fit_rate(budgets: &[f64], mean_excess: &[f64]) -> Result<RateFit> {
    if budgets.len() != mean_excess.len() {
        return Err(Error::DimensionMismatch {
            expected: budgets.len(),
            found: mean_excess.len(),
        });
    }
    let mut log_budgets = Vec::new();
    let mut log_excess = Vec::new();
    let mut dropped = Vec::new();
    for (&t, &e) in budgets.iter().zip(mean_excess) {
        if !(t > 0.0) {
            return Err(Error::invalid("budgets", format!("must be positive, got {t}")));
        }
        if e > 0.0 && e.is_finite() {
            log_budgets.push(t.ln());
            log_excess.push(e.ln());
        } else {
            dropped.push(t);
        }
    }
    if log_budgets.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need 3 budgets with positive excess, got {}",
            log_budgets.len()
        )));
    }
    let (slope, intercept, r_squared) = ols(&log_budgets, &log_excess)?;
    Ok(RateFit {
        log_budgets,
        log_excess,
        slope,
        intercept,
        r_squared,
        dropped,
    })
}

/// Fits `log₂(excess_k)` against `k` over the leading run of epochs whose
/// excess exceeds `10·floor`, where `floor` is the noise plateau `2F*/β`.
pub fn epoch_decay_fit(epoch_excess: &[f64], floor: f64) -> Result<DecayFit> {
    let threshold = 10.0 * floor.max(0.0);
    let used = epoch_excess
        .iter()
        .take_while(|&&e| e > threshold && e > 0.0 && e.is_finite())
        .count();
    if used < 3 {
        return Err(Error::InsufficientData(format!(
            "need 3 epochs above the plateau threshold {threshold}, got {used}"
        )));
    }
    let k: Vec<f64> = (0..used).map(|i| i as f64).collect();
    let logs: Vec<f64> = epoch_excess[..used].iter().map(|e| e.log2()).collect();
    let (slope, intercept, _) = ols(&k, &logs)?;
    Ok(DecayFit {
        slope,
        intercept,
        epochs_used: used,
    })
}
