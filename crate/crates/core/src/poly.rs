//! Real polynomials, dyadic rescaling, root geometry and the exceptional
//! sets `E_k`.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::str::FromStr;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fit::linear_fit;
use crate::intervals::IntervalUnion;
#[allow(unused_imports)]
use num_traits::Float;

/// Coefficients are stored constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    monic: bool,
}

/// Roots of a polynomial. Complex roots are stored once, with `b > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootData {
    pub real_roots: Vec<f64>,
    pub complex_roots: Vec<(f64, f64)>,
    /// Sorted real roots of `P'` and `P''`.
    pub u_set: Vec<f64>,
}

impl Polynomial {
    /// Trailing zero coefficients are stripped; all-zero input is rejected
    /// (use [`Polynomial::zero`]).
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("polynomial coefficients must be finite"));
        }
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs[coeffs.len() - 1] == 0.0 {
            return Err(invalid("leading coefficient must be nonzero"));
        }
        let monic = coeffs[coeffs.len() - 1] == 1.0;
        Ok(Polynomial { coeffs, monic })
    }

    /// The zero polynomial, the only one whose leading coefficient is 0.
    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0], monic: false }
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Polynomial { coeffs: c, monic: true }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn is_monic(&self) -> bool {
        self.monic
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `(P(x), P'(x), P''(x))` by a single Horner sweep.
    pub fn eval2(&self, x: f64) -> (f64, f64, f64) {
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * x + 2.0 * d1;
            d1 = d1 * x + p;
            p = p * x + c;
        }
        (p, d1, d2)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.degree() == 0 {
            return Polynomial::zero();
        }
        let c: Vec<f64> = self.coeffs.iter().enumerate().skip(1).map(|(j, &c)| c * j as f64).collect();
        Polynomial { monic: c[c.len() - 1] == 1.0, coeffs: c }
    }

    fn combine(&self, other: &Polynomial, a: f64, b: f64) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0.0; n];
        for (j, v) in self.coeffs.iter().enumerate() {
            c[j] += a * v;
        }
        for (j, v) in other.coeffs.iter().enumerate() {
            c[j] += b * v;
        }
        Polynomial::new(c).unwrap_or_else(|_| Polynomial::zero())
    }

    fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c).unwrap_or_else(|_| Polynomial::zero())
    }

    /// Monic normalization; returns the polynomial and the divided-out
    /// leading coefficient.
    pub fn to_monic(&self) -> (Polynomial, f64) {
        let s = self.leading();
        if self.monic || s == 0.0 {
            return (self.clone(), 1.0);
        }
        let mut c: Vec<f64> = self.coeffs.iter().map(|v| v / s).collect();
        let n = c.len() - 1;
        c[n] = 1.0;
        (Polynomial { coeffs: c, monic: true }, s)
    }

    /// `P̃_k(x) = 2^{-nk} P(2^k x)` of the monic normalization of `P`.
    pub fn rescale(&self, k: u32) -> Polynomial {
        let (m, _) = self.to_monic();
        let n = m.degree() as i32;
        let c: Vec<f64> = m
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &v)| v * 2f64.powi((j as i32 - n) * k as i32))
            .collect();
        Polynomial { monic: true, coeffs: c }
    }

    /// `P(ωx)/(s ωⁿ)` with `s` the leading coefficient: monic, and the
    /// polynomial seen after the ω normalization.
    pub fn normalized_at_scale(&self, omega: f64) -> Polynomial {
        let n = self.degree() as i32;
        let s = self.leading();
        let c: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &v)| v * omega.powi(j as i32 - n) / s)
            .collect();
        let mut p = Polynomial::new(c).unwrap_or_else(|_| Polynomial::zero());
        let d = p.coeffs.len() - 1;
        p.coeffs[d] = 1.0;
        p.monic = true;
        p
    }

    /// All roots by companion-matrix eigenvalues, polished by Newton steps.
    pub fn roots(&self) -> RootData {
        let (real_roots, complex_roots) = self.raw_roots();
        let mut u_set = Vec::new();
        let d1 = self.derivative();
        if d1.degree() >= 1 {
            u_set.extend(d1.raw_roots().0);
            let d2 = d1.derivative();
            if d2.degree() >= 1 {
                u_set.extend(d2.raw_roots().0);
            }
        }
        u_set.sort_by(f64::total_cmp);
        u_set.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        RootData { real_roots, complex_roots, u_set }
    }

    /// Real roots (sorted) and upper-half-plane complex roots.
    fn raw_roots(&self) -> (Vec<f64>, Vec<(f64, f64)>) {
        let n = self.degree();
        if n == 0 || self.is_zero() {
            return (Vec::new(), Vec::new());
        }
        let (m, _) = self.to_monic();
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -m.coeffs[i];
        }
        let eig: Vec<Complex64> = match Schur::try_new(comp, f64::EPSILON, 2000) {
            Some(s) => s.complex_eigenvalues().iter().copied().collect(),
            None => m.aberth(),
        };
        let mut real = Vec::new();
        let mut cplx = Vec::new();
        for z0 in eig.iter() {
            let z = m.polish(*z0);
            let scale = 1.0 + z.norm();
            if z.im.abs() <= 1e-7 * scale {
                real.push(m.polish_real(z.re));
            } else if z.im > 0.0 {
                cplx.push((z.re, z.im));
            }
        }
        real.sort_by(f64::total_cmp);
        (real, cplx)
    }

    /// Simultaneous Aberth–Ehrlich iteration for a monic polynomial.
    fn aberth(&self) -> Vec<Complex64> {
        let n = self.degree();
        let d = self.derivative();
        let radius = 1.0 + self.coeffs[..n].iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let mut z: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(radius, 2.0 * core::f64::consts::PI * j as f64 / n as f64 + 0.4))
            .collect();
        for _ in 0..1000 {
            let mut worst: f64 = 0.0;
            for j in 0..n {
                let p = self.eval_complex(z[j]);
                let dp = d.eval_complex(z[j]);
                if p.norm() == 0.0 {
                    continue;
                }
                let w = p / dp;
                let mut sum = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    if i != j {
                        sum += (z[j] - z[i]).inv();
                    }
                }
                let step = w / (Complex64::new(1.0, 0.0) - w * sum);
                if step.re.is_finite() && step.im.is_finite() {
                    z[j] -= step;
                    worst = worst.max(step.norm() / (1.0 + z[j].norm()));
                }
            }
            if worst < 1e-15 {
                break;
            }
        }
        z
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        let d = self.derivative();
        let mut best = self.eval_complex(z).norm();
        for _ in 0..8 {
            let dz = d.eval_complex(z);
            if dz.norm() == 0.0 {
                break;
            }
            let cand = z - self.eval_complex(z) / dz;
            let r = self.eval_complex(cand).norm();
            if !(r < best) {
                break;
            }
            best = r;
            z = cand;
        }
        z
    }

    fn polish_real(&self, mut x: f64) -> f64 {
        let mut best = self.eval(x).abs();
        for _ in 0..8 {
            let (p, d, _) = self.eval2(x);
            if d == 0.0 {
                break;
            }
            let cand = x - p / d;
            let r = self.eval(cand).abs();
            if !(r < best) {
                break;
            }
            best = r;
            x = cand;
        }
        x
    }

    /// Monic polynomial with the given roots (complex roots with conjugates).
    pub fn from_roots(real: &[f64], complex: &[(f64, f64)]) -> Polynomial {
        let mut p = Polynomial { coeffs: vec![1.0], monic: true };
        for &r in real {
            p = p.mul(&Polynomial { coeffs: vec![-r, 1.0], monic: true });
        }
        for &(a, b) in complex {
            p = p.mul(&Polynomial { coeffs: vec![a * a + b * b, -2.0 * a, 1.0], monic: true });
        }
        p
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Comma-separated coefficients, constant term first: `"1,0,1"` is `x²+1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Vec::new();
        for part in s.split(',') {
            let t = part.trim();
            let v: f64 = t
                .parse()
                .map_err(|_| Error::Invalid(format!("bad polynomial coefficient '{t}'")))?;
            c.push(v);
        }
        Polynomial::new(c)
    }
}

impl core::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| format!("{c}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Free-function form of [`Polynomial::rescale`].
pub fn rescale(p: &Polynomial, k: u32) -> Polynomial {
    p.rescale(k)
}

/// Exclusion radius around roots of `P̃_k'`.
pub const POLE_EXCLUSION: f64 = 1e-9;

/// Membership test for `E_k` of an already rescaled monic polynomial.
#[derive(Debug, Clone)]
pub struct EkTest {
    pub q: Polynomial,
    pub c1: f64,
    pub poles: Vec<f64>,
    n: f64,
}

impl EkTest {
    pub fn new(q: Polynomial, c1: f64) -> Self {
        let poles = q.derivative().raw_roots().0;
        let n = q.degree() as f64;
        EkTest { q, c1, poles, n }
    }

    /// `|P̃/P̃'| ≤ 4/C1` and `(P̃/P̃')' ≤ 1/(8n)`, away from poles.
    pub fn contains(&self, x: f64) -> bool {
        if self.poles.iter().any(|r| (x - r).abs() <= POLE_EXCLUSION) {
            return false;
        }
        let (p, d1, d2) = self.q.eval2(x);
        if d1 == 0.0 {
            return false;
        }
        let first = p.abs() <= (4.0 / self.c1) * d1.abs();
        // (p/p')' = (p'² − p p'')/p'²; multiplied through by p'² > 0.
        let second = (1.0 - 1.0 / (8.0 * self.n)) * d1 * d1 - p * d2 <= 0.0;
        first && second
    }

    /// `|P̃/P̃'|(x)`.
    pub fn ratio(&self, x: f64) -> f64 {
        let (p, d1, _) = self.q.eval2(x);
        (p / d1).abs()
    }

    /// `(P̃/P̃')'(x)`.
    pub fn ratio_slope(&self, x: f64) -> f64 {
        let (p, d1, d2) = self.q.eval2(x);
        (d1 * d1 - p * d2) / (d1 * d1)
    }
}

fn bisect_boundary(t: &EkTest, mut inside: f64, mut outside: f64, resolution: f64) -> f64 {
    while (inside - outside).abs() > resolution {
        let m = 0.5 * (inside + outside);
        if m == inside || m == outside {
            break;
        }
        if t.contains(m) {
            inside = m;
        } else {
            outside = m;
        }
    }
    0.5 * (inside + outside)
}

/// Approximates `E_k` of the monic normalization of `P`.
///
/// Membership is constant between consecutive real roots of `P̃'`,
/// `P̃ ± (4/C1) P̃'` and `(1 − 1/(8n)) P̃'² − P̃ P̃''`; these breakpoints are
/// merged into a uniform grid on the bounding box, each cell is classified
/// at its midpoint and boundaries are bisected to `resolution`.
pub fn compute_ek(p: &Polynomial, k: u32, c1: f64, resolution: f64) -> Result<IntervalUnion> {
    if p.degree() == 0 || p.is_zero() {
        return Err(invalid("E_k is undefined for constant polynomials"));
    }
    if !(c1 > 0.0) || !(resolution > 0.0) {
        return Err(invalid("C1 and resolution must be positive"));
    }
    let q = p.rescale(k);
    Ok(ek_of_rescaled(q, c1, resolution))
}

/// [`compute_ek`] for an already rescaled monic `P̃_k`.
pub fn ek_of_rescaled(q: Polynomial, c1: f64, resolution: f64) -> IntervalUnion {
    let n = q.degree() as f64;
    let d1 = q.derivative();
    let d2 = d1.derivative();
    let w = 4.0 / c1;
    let crit = d1.mul(&d1).combine(&q.mul(&d2), 1.0 - 1.0 / (8.0 * n), -1.0);

    let mut breaks: Vec<f64> = Vec::new();
    let mut anchors: Vec<f64> = Vec::new();
    for poly in [&q, &d1] {
        let (re, cx) = poly.raw_roots();
        anchors.extend(re.iter().copied());
        anchors.extend(cx.iter().map(|c| c.0));
    }
    for poly in [&d1, &q.combine(&d1, 1.0, -w), &q.combine(&d1, 1.0, w), &crit] {
        breaks.extend(poly.raw_roots().0);
    }
    let test = EkTest::new(q, c1);
    for r in &test.poles {
        breaks.push(r - 2.0 * POLE_EXCLUSION);
        breaks.push(r + 2.0 * POLE_EXCLUSION);
    }
    let amin = anchors.iter().copied().fold(0.0, f64::min);
    let amax = anchors.iter().copied().fold(0.0, f64::max);
    let mut lo = amin - 2.0 * w - 1.0;
    let mut hi = amax + 2.0 * w + 1.0;

    loop {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        let cells = 4096;
        for i in 0..=cells {
            pts.push(lo + (hi - lo) * i as f64 / cells as f64);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mids: Vec<f64> = pts.windows(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        let inside: Vec<bool> = mids.iter().map(|&m| test.contains(m)).collect();

        let mut out = Vec::new();
        let mut i = 0;
        while i < mids.len() {
            if !inside[i] {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < mids.len() && inside[j + 1] {
                j += 1;
            }
            let left = if i == 0 { lo } else { bisect_boundary(&test, mids[i], mids[i - 1], resolution) };
            let right =
                if j + 1 == mids.len() { hi } else { bisect_boundary(&test, mids[j], mids[j + 1], resolution) };
            out.push((left, right));
            i = j + 1;
        }

        // Outer scan: nothing of E_k may sit beyond the box.
        let width = hi - lo;
        let escaped = (1..=256).any(|i| {
            let d = width * 4.0 * i as f64 / 256.0;
            test.contains(lo - d) || test.contains(hi + d)
        });
        if !escaped || width > 1e12 {
            return IntervalUnion::new(out);
        }
        lo -= width;
        hi += width;
    }
}

/// Partial sum of `|E_k|^α` for `k = 0..=kmax`, with per-k measures.
#[derive(Debug, Clone, PartialEq)]
pub struct EkSum {
    pub partial_sum: f64,
    /// `2^{slope}` of a log2 fit over the last quartile of positive terms;
    /// 0 when those terms all vanish.
    pub tail_ratio: f64,
    pub measures: Vec<f64>,
}

pub fn sum_ek_alpha(p: &Polynomial, alpha: f64, kmax: u32, c1: f64, resolution: f64) -> Result<EkSum> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut measures = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        measures.push(compute_ek(p, k, c1, resolution)?.measure());
    }
    let terms: Vec<f64> = measures.iter().map(|m| if *m > 0.0 { m.powf(alpha) } else { 0.0 }).collect();
    let partial_sum = terms.iter().fold(0.0, |a, t| a + t);
    let start = (3 * terms.len()) / 4;
    let tail = &terms[start.min(terms.len().saturating_sub(2))..];
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, v.log2()))
        .unzip();
    let tail_ratio = if xs.is_empty() {
        0.0
    } else if xs.len() == 1 {
        if tail[tail.len() - 1] == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        2f64.powf(linear_fit(&xs, &ys).0)
    };
    Ok(EkSum { partial_sum, tail_ratio, measures })
}

/// Empirical constant `min |P'(z)| / δ^{n−1}` over points at distance more
/// than δ from `U`.
///
/// Between points of `U` the function `|P'|` has no interior local minimum,
/// so the minimum sits at the edges `u ± δ`; `samples` uniform points across
/// the bounding box are checked as well.
pub fn verify_gradient_bound(p: &Polynomial, delta: f64, samples: usize) -> Result<f64> {
    if p.degree() == 0 || p.is_zero() {
        return Err(invalid("gradient bound needs degree at least 1"));
    }
    if !(delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    let (m, _) = p.to_monic();
    let n = m.degree() as i32;
    let d = m.derivative();
    let u = m.roots().u_set;
    if u.is_empty() {
        return Ok(d.eval(0.0).abs() / delta.powi(n - 1));
    }
    let admissible = |z: f64| u.iter().all(|r| (z - r).abs() >= delta * (1.0 - 1e-12));
    let mut best = f64::INFINITY;
    for r in &u {
        for z in [r - delta, r + delta] {
            if admissible(z) {
                best = best.min(d.eval(z).abs());
            }
        }
    }
    let lo = u[0] - 4.0 * delta - 1.0;
    let hi = u[u.len() - 1] + 4.0 * delta + 1.0;
    for i in 0..samples {
        let z = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
        if u.iter().all(|r| (z - r).abs() > delta) {
            best = best.min(d.eval(z).abs());
        }
    }
    Ok(best / delta.powi(n - 1))
}

/// Discrete total variation of `samples` against the bound `2(m+1)C`.
pub fn tv_sign_change_check(samples: &[f64], m: usize, c: f64) -> Result<bool> {
    if samples.len() < 2 {
        return Err(invalid("need at least two samples"));
    }
    let fmax = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(c >= fmax * (1.0 - 1e-12)) {
        return Err(Error::Invalid(format!("C = {c} is below max |f| = {fmax}")));
    }
    let mut tv = 0.0;
    let mut last_sign = 0i8;
    let mut last_change: Option<usize> = None;
    let mut changes = 0usize;
    for i in 1..samples.len() {
        let d = samples[i] - samples[i - 1];
        tv += d.abs();
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                if last_change == Some(i - 1) {
                    return Err(Error::Undersampled { index: i });
                }
                last_change = Some(i);
                changes += 1;
            }
            last_sign = s;
        }
    }
    if changes > m {
        return Err(Error::Invalid(format!("observed {changes} sign changes, more than m = {m}")));
    }
    Ok(tv <= 2.0 * (m as f64 + 1.0) * c * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(p("0,1,1").rescale(1).coeffs(), &[0.0, 0.5, 1.0]);
        let q = p("2,-3,0.5,1");
        assert_eq!(q.rescale(0), q);
        assert_eq!(Polynomial::monomial(3).rescale(5), Polynomial::monomial(3));
    }

    #[test]
    fn roots_reconstruct() {
        let q = Polynomial::from_roots(&[-2.0, 0.5, 3.0], &[(1.0, 2.0)]);
        let r = q.roots();
        assert_eq!(r.real_roots.len() + 2 * r.complex_roots.len(), 5);
        let back = Polynomial::from_roots(&r.real_roots, &r.complex_roots);
        for (a, b) in q.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn roots_of_biquadratic_without_real_roots() {
        let q = Polynomial::new(vec![0.17205482281351844, 0.0, -0.0653808380410082, 0.0, 1.0]).unwrap();
        let r = q.roots();
        assert!(r.real_roots.is_empty());
        assert_eq!(r.complex_roots.len(), 2);
        for &(a, b) in &r.complex_roots {
            assert!(q.eval_complex(Complex64::new(a, b)).norm() < 1e-12);
        }
    }

    #[test]
    fn degree_zero_has_no_ek() {
        assert!(compute_ek(&p("3"), 0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!("1,x".parse::<Polynomial>().is_err());
        assert!("0,0".parse::<Polynomial>().is_err());
        assert_eq!(p("1,2,0").degree(), 1);
    }

    #[test]
    fn tv_undersampled() {
        let zig = [0.0, 1.0, 0.0, 1.0, 0.0];
        assert!(matches!(tv_sign_change_check(&zig, 10, 1.0), Err(Error::Undersampled { .. })));
    }
}
