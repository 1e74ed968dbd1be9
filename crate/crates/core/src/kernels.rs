//! The `TT*` kernel `𝕃_k(x, y)`, its Schur row and column integrals and
//! decay fits across dyadic levels.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::Curve;
use crate::error::{invalid, Result};
use crate::fit::{fit_decay, DecayFit};
use crate::intervals::IntervalUnion;
use crate::oscquad::{oscillatory_integral_with, OscOptions, PhaseSpec};
use crate::poly::{ek_of_rescaled, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub k: u32,
    pub x: f64,
    pub y: f64,
    pub value: Complex64,
    /// Error estimate; `f64::INFINITY` when the quadrature did not converge.
    pub err: f64,
}

impl KernelSample {
    pub fn converged(&self) -> bool {
        self.err.is_finite()
    }
}

/// Per-level data shared by every sample at one `k`.
#[derive(Debug, Clone)]
pub struct KernelLevel {
    pub curve: Curve,
    pub omega: f64,
    pub k: u32,
    /// `P̃_k` of the ω-normalized polynomial.
    pub ptilde: Polynomial,
    pub ek: IntervalUnion,
    pub c1: f64,
    pub opts: OscOptions,
}

impl KernelLevel {
    /// `p` is the original polynomial; the phase uses `P̃_k` of
    /// `P(ωx)/(sωⁿ)`.
    pub fn new(p: &Polynomial, curve: &Curve, omega: f64, k: u32, c1: f64, opts: OscOptions) -> Result<Self> {
        if p.degree() == 0 {
            return Err(invalid("the kernel needs a nonconstant polynomial"));
        }
        if !(c1 > 0.0) || !(opts.tol > 0.0) {
            return Err(invalid("C1 and tol must be positive"));
        }
        let ptilde = p.normalized_at_scale(omega).rescale(k);
        let ek = ek_of_rescaled(ptilde.clone(), c1, 1e-12);
        Ok(KernelLevel { curve: curve.clone(), omega, k, ptilde, ek, c1, opts })
    }

    fn sample_over(&self, x: f64, y: f64, lo: f64, hi: f64) -> Result<KernelSample> {
        let zero = KernelSample { k: self.k, x, y, value: Complex64::new(0.0, 0.0), err: 0.0 };
        if !(hi > lo) {
            return Ok(zero);
        }
        let domain = IntervalUnion::interval(lo, hi).subtract(&self.ek);
        if domain.is_empty() {
            return Ok(zero);
        }
        let spec = PhaseSpec::new(self.curve.clone(), self.omega, self.k, self.ptilde.clone(), x, y)?;
        let r = oscillatory_integral_with(|z| spec.psi(z), |z| 1.0 / ((z - x) * (z - y)), &domain, self.opts);
        let err = if r.converged { r.abs_error_estimate } else { f64::INFINITY };
        Ok(KernelSample { k: self.k, x, y, value: r.value, err })
    }

    /// `𝕃_k(x, y)`: the region `1 ≤ z−y < z−x ≤ 2`, nonzero only for
    /// `0 < y−x < 1`.
    pub fn half(&self, x: f64, y: f64) -> Result<KernelSample> {
        if !(y > x) {
            return Ok(KernelSample { k: self.k, x, y, value: Complex64::new(0.0, 0.0), err: 0.0 });
        }
        self.sample_over(x, y, y + 1.0, x + 2.0)
    }

    /// `L_k(x, y)` over `1 ≤ z−x, z−y ≤ 2`, both orientations.
    pub fn full(&self, x: f64, y: f64) -> Result<KernelSample> {
        if x == y {
            return Err(invalid("L_k is evaluated off the diagonal"));
        }
        self.sample_over(x, y, x.max(y) + 1.0, x.min(y) + 2.0)
    }

    /// `∫ dz/((z−x)(z−y))` over the unmasked region `[y+1, x+2]`, with the
    /// phase removed; computed by the same quadrature engine.
    pub fn phase_off(&self, x: f64, y: f64) -> KernelSample {
        let mut s = KernelSample { k: self.k, x, y, value: Complex64::new(0.0, 0.0), err: 0.0 };
        if !(y > x) || !(x + 2.0 > y + 1.0) {
            return s;
        }
        let domain = IntervalUnion::interval(y + 1.0, x + 2.0);
        let r = oscillatory_integral_with(|_| 0.0, |z| 1.0 / ((z - x) * (z - y)), &domain, self.opts);
        s.value = r.value;
        s.err = if r.converged { r.abs_error_estimate } else { f64::INFINITY };
        s
    }
}

/// One half-kernel sample, building the level on the fly.
#[allow(clippy::too_many_arguments)]
pub fn compute_kernel(
    p: &Polynomial,
    curve: &Curve,
    omega: f64,
    k: u32,
    x: f64,
    y: f64,
    c1: f64,
    tol: f64,
) -> Result<KernelSample> {
    let opts = OscOptions { tol, ..OscOptions::default() };
    KernelLevel::new(p, curve, omega, k, c1, opts)?.half(x, y)
}

/// Closed form of `∫_{y+1}^{x+2} dz/((z−x)(z−y))`, `d = y−x ∈ (0, 1)`.
pub fn trivial_bound(x: f64, y: f64) -> f64 {
    let d = y - x;
    if !(d > 0.0 && d < 1.0) {
        return 0.0;
    }
    // (2−d)(1+d)/2 = 1 + d(1−d)/2
    (0.5 * d * (1.0 - d)).ln_1p() / d
}

/// Which integrand a row or column accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowMode {
    Oscillatory,
    PhaseOff,
}

/// Offsets `d ∈ (0, 1]` for row and column integrals: geometric points
/// toward 0 merged with uniform points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowGrid {
    pub geometric: usize,
    pub uniform: usize,
    pub d_min: f64,
}

impl Default for RowGrid {
    fn default() -> Self {
        RowGrid { geometric: 256, uniform: 256, d_min: 1e-6 }
    }
}

impl RowGrid {
    pub fn offsets(&self) -> Vec<f64> {
        let mut d = Vec::with_capacity(self.geometric + self.uniform);
        let lmin = self.d_min.ln();
        for i in 0..self.geometric {
            d.push((lmin * (1.0 - i as f64 / (self.geometric - 1).max(1) as f64)).exp());
        }
        for i in 1..=self.uniform {
            d.push(i as f64 / self.uniform as f64);
        }
        d.sort_by(f64::total_cmp);
        d.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowIntegral {
    pub k: u32,
    /// The fixed coordinate: `y` for rows, `x` for columns.
    pub anchor: f64,
    pub value: f64,
    pub converged: bool,
    pub unconverged: usize,
    pub samples: usize,
}

fn accumulate<F: FnMut(f64) -> Result<KernelSample>>(k: u32, anchor: f64, grid: &RowGrid, mut f: F) -> Result<RowIntegral> {
    let d = grid.offsets();
    let mut vals = alloc::vec![0.0; d.len()];
    let mut row = RowIntegral { k, anchor, value: 0.0, converged: true, unconverged: 0, samples: 0 };
    // Largest offsets carry the largest phases; fail fast on them.
    for i in (0..d.len()).rev() {
        let s = f(d[i])?;
        row.samples += 1;
        if !s.converged() {
            row.unconverged += 1;
            row.converged = false;
            row.value = f64::NAN;
            return Ok(row);
        }
        vals[i] = s.value.norm();
    }
    let mut total = d[0] * vals[0];
    for i in 1..d.len() {
        total += 0.5 * (d[i] - d[i - 1]) * (vals[i] + vals[i - 1]);
    }
    row.value = total;
    Ok(row)
}

/// `∫ |𝕃_k(x, y)| dx` over `x ∈ [y−1, y)`; an unconverged sample stops the
/// row and flags it.
pub fn schur_row_integral(level: &KernelLevel, y: f64, mode: RowMode, grid: &RowGrid) -> Result<RowIntegral> {
    accumulate(level.k, y, grid, |d| match mode {
        RowMode::Oscillatory => level.half(y - d, y),
        RowMode::PhaseOff => Ok(level.phase_off(y - d, y)),
    })
}

/// `∫ |𝕃_k(x, y)| dy` over `y ∈ (x, x+1]`.
pub fn schur_column_integral(level: &KernelLevel, x: f64, mode: RowMode, grid: &RowGrid) -> Result<RowIntegral> {
    accumulate(level.k, x, grid, |d| match mode {
        RowMode::Oscillatory => level.half(x, x + d),
        RowMode::PhaseOff => Ok(level.phase_off(x, x + d)),
    })
}

/// Decay fit over the converged entries; also returns how many were left out.
pub fn fit_rows(rows: &[RowIntegral]) -> (Result<DecayFit>, usize) {
    let series: Vec<(i64, f64)> =
        rows.iter().filter(|r| r.converged && r.value > 0.0).map(|r| (r.k as i64, r.value)).collect();
    let excluded = rows.len() - series.len();
    (fit_decay(&series), excluded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn level(k: u32) -> KernelLevel {
        let p = Polynomial::new(alloc::vec![0.0, 1.0]).unwrap();
        KernelLevel::new(&p, &Curve::power(2.0), 1.0, k, 1.0, OscOptions::default()).unwrap()
    }

    #[test]
    fn support() {
        let l = level(0);
        assert_eq!(l.half(0.0, 1.5).unwrap().value, Complex64::new(0.0, 0.0));
        assert_eq!(l.half(0.5, 0.0).unwrap().value, Complex64::new(0.0, 0.0));
        assert_eq!(l.half(0.0, 1.0).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn trivial_bound_limits() {
        assert_relative_eq!(trivial_bound(0.0, 1e-9), 0.5, max_relative = 1e-8);
        assert_eq!(trivial_bound(0.0, 1.0), 0.0);
        let d: f64 = 0.3;
        assert_relative_eq!(trivial_bound(0.0, d), ((2.0 - d) * (1.0 + d) / 2.0).ln() / d, max_relative = 1e-14);
    }

    #[test]
    fn phase_off_matches_closed_form() {
        let l = level(3);
        let s = l.phase_off(0.1, 0.5);
        assert_relative_eq!(s.value.re, trivial_bound(0.1, 0.5), max_relative = 1e-12);
    }

    #[test]
    fn offsets_cover_unit_interval() {
        let d = RowGrid::default().offsets();
        assert_eq!(*d.last().unwrap(), 1.0);
        assert_relative_eq!(d[0], 1e-6, max_relative = 1e-12);
        assert!(d.windows(2).all(|w| w[1] > w[0]));
    }
}
