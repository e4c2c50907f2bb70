//! Least-squares helpers for power-law exponents and hypothesis constants.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    /// Intercept of the fitted line in `(ln x, ln y)`.
    pub intercept: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
}

/// Straight-line fit on `(ln x, ln y)`.
pub fn fit_power_exponent(points: &[(f64, f64)]) -> Result<PowerFit> {
    let weighted: Vec<_> = points.iter().map(|&(x, y)| (x, y, 1.0)).collect();
    fit_power_exponent_weighted(&weighted)
}

/// Weighted straight-line fit on `(ln x, ln y)` with weights `w`.
pub fn fit_power_exponent_weighted(points: &[(f64, f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a power fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y, _)) = points.iter().find(|&&(x, y, _)| !(x > 0.0) || !(y > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "power fit needs positive data, got ({x}, {y})"
        )));
    }
    if points.iter().any(|&(_, _, w)| !(w > 0.0)) {
        return Err(Error::InvalidParameter("fit weights must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let ws: Vec<f64> = points.iter().map(|p| p.2).collect();
    let (slope, intercept, stderr) = weighted_line(&xs, &ys, &ws)?;
    Ok(PowerFit { exponent: slope, intercept, stderr })
}

/// Weighted least-squares line `y = a + b x`; returns `(b, a, se(b))`.
pub fn weighted_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> Result<(f64, f64, f64)> {
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    if !(sxx > 1e-12 * sw) {
        return Err(Error::InvalidParameter("degenerate x-range for a line fit".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).zip(ws).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let k = xs.len() as f64;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    // Weights are relative; the residual variance sets the scale.
    let stderr = if k > 2.0 { (rss / (k - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok((slope, intercept, stderr))
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Scale `C` minimizing `Σ (y - C f)²` over `(f, y)` pairs, where `f` is a
/// predictor evaluated with unit constant.
pub fn fit_scale(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("no points to fit a constant to".into()));
    }
    let sff: f64 = pairs.iter().map(|(f, _)| f * f).sum();
    if !(sff > 0.0) {
        return Err(Error::InvalidParameter("predictor vanishes on every point".into()));
    }
    Ok(pairs.iter().map(|(f, y)| f * y).sum::<f64>() / sff)
}

/// Mean and standard error of the mean. The error is `None` below two samples.
pub fn mean_stderr(values: &[f64]) -> (f64, Option<f64>) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, Some((var / k).sqrt()))
}
