//! Least-squares lines in log2 space.

use alloc::format;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Line `log2(value) ≈ intercept + slope·k` fitted to a positive series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest |fit − data| in log2 units.
    pub residual: f64,
    pub k_range: (i64, i64),
}

/// Ordinary least squares; returns `(slope, intercept, max |residual|)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (intercept + slope * x - y).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

/// Fit `log2 value` against `k`. Needs at least four entries, all positive.
pub fn fit_decay(series: &[(i64, f64)]) -> Result<DecayFit> {
    if series.len() < 4 {
        return Err(Error::Invalid(format!(
            "decay fit needs at least 4 points, got {}",
            series.len()
        )));
    }
    let mut xs = alloc::vec::Vec::with_capacity(series.len());
    let mut ys = alloc::vec::Vec::with_capacity(series.len());
    for &(k, v) in series {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Invalid(format!("non-positive value {v} at k = {k}")));
        }
        xs.push(k as f64);
        ys.push(v.log2());
    }
    let (slope, intercept, residual) = linear_fit(&xs, &ys);
    let kmin = series.iter().map(|s| s.0).min().unwrap_or(0);
    let kmax = series.iter().map(|s| s.0).max().unwrap_or(0);
    Ok(DecayFit { slope, intercept, residual, k_range: (kmin, kmax) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_halving() {
        let s: Vec<(i64, f64)> = (0..8).map(|k| (k, 0.5f64.powi(k as i32))).collect();
        let f = fit_decay(&s).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert_eq!(f.k_range, (0, 7));
    }

    #[test]
    fn offset_quarter_rate() {
        let s: Vec<(i64, f64)> =
            (0..10).map(|k| (k, 3.0 * 2f64.powf(-0.25 * k as f64))).collect();
        let f = fit_decay(&s).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_and_nonpositive() {
        assert!(fit_decay(&[(0, 1.0), (1, 0.5), (2, 0.25)]).is_err());
        assert!(fit_decay(&[(0, 1.0), (1, 0.5), (2, 0.0), (3, 0.1)]).is_err());
    }
}
