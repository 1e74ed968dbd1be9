//! Oscillatory quadrature and the phase objects of the `TT*` kernel: φ, ψ,
//! the ratio Υ, the scale ω and the integrals `J^r`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, LN_2};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::Curve;
use crate::error::{invalid, Error, Result};
use crate::intervals::IntervalUnion;
use crate::poly::{ek_of_rescaled, EkTest, Polynomial};
use crate::quad::{gk15, integrate_graded};

/// Default panel budget per integral.
pub const PANEL_BUDGET: usize = 200_000;
/// Default absolute tolerance per unit length of the domain.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Samples of the phase used to reject hopeless integrals up front.
const PRESCREEN_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub panels: usize,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult { value: Complex64::new(0.0, 0.0), abs_error_estimate: 0.0, panels: 0, converged: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscOptions {
    /// Absolute tolerance per unit length.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for OscOptions {
    fn default() -> Self {
        OscOptions { tol: DEFAULT_TOL, max_panels: PANEL_BUDGET }
    }
}

struct Panel {
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
}

/// `∫_domain e^{i·phase(z)} dz`.
pub fn oscillatory_integral<P: FnMut(f64) -> f64>(phase: P, domain: &IntervalUnion, tol: f64) -> QuadResult {
    oscillatory_integral_with(phase, |_| 1.0, domain, OscOptions { tol, ..OscOptions::default() })
}

/// `∫_domain amplitude(z)·e^{i·phase(z)} dz` for a smooth amplitude.
///
/// Panels are bisected while the phase differs by more than π/4 between
/// any two of their endpoints and midpoint, then while the K15 and G7
/// estimates differ by more than `tol·width`.
pub fn oscillatory_integral_with<P, A>(
    mut phase: P,
    mut amplitude: A,
    domain: &IntervalUnion,
    opts: OscOptions,
) -> QuadResult
where
    P: FnMut(f64) -> f64,
    A: FnMut(f64) -> f64,
{
    let measure = domain.measure();
    if measure == 0.0 {
        return QuadResult::zero();
    }
    if let Some(r) = prescreen(&mut phase, &mut amplitude, domain, opts.max_panels) {
        return r;
    }

    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = 0usize;
    let mut converged = true;
    let mut stack: Vec<Panel> = Vec::new();
    for &(lo, hi) in domain.intervals() {
        if hi > lo {
            stack.push(Panel { a: lo, b: hi, pa: phase(lo), pb: phase(hi) });
            panels += 1;
        }
    }
    let mut integrand = |z: f64, ph: &mut P| Complex64::from_polar(amplitude(z), ph(z));

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let splittable = m > p.a && m < p.b;
        if panels > opts.max_panels {
            let (k, g) = gk15(&mut |z| integrand(z, &mut phase), p.a, p.b);
            value += k;
            error += (k - g).norm();
            converged = false;
            continue;
        }
        let pm = phase(m);
        let spread = (p.pa - pm).abs().max((p.pb - pm).abs()).max((p.pa - p.pb).abs());
        if spread > FRAC_PI_4 && splittable {
            stack.push(Panel { a: m, b: p.b, pa: pm, pb: p.pb });
            stack.push(Panel { a: p.a, b: m, pa: p.pa, pb: pm });
            panels += 1;
            continue;
        }
        let (k, g) = gk15(&mut |z| integrand(z, &mut phase), p.a, p.b);
        let e = (k - g).norm();
        if e > opts.tol * (p.b - p.a) && splittable {
            stack.push(Panel { a: m, b: p.b, pa: pm, pb: p.pb });
            stack.push(Panel { a: p.a, b: m, pa: p.pa, pb: pm });
            panels += 1;
            continue;
        }
        if !splittable && (spread > FRAC_PI_4 || e > opts.tol * (p.b - p.a)) {
            converged = false;
        }
        value += k;
        error += e;
    }
    if !(value.re.is_finite() && value.im.is_finite()) {
        converged = false;
    }
    converged &= error <= opts.tol * measure;
    QuadResult { value, abs_error_estimate: error, panels, converged }
}

/// Rejects integrals whose sampled phase variation already exceeds what the
/// panel budget can resolve; returns a midpoint-rule estimate for those.
fn prescreen<P, A>(phase: &mut P, amplitude: &mut A, domain: &IntervalUnion, budget: usize) -> Option<QuadResult>
where
    P: FnMut(f64) -> f64,
    A: FnMut(f64) -> f64,
{
    let measure = domain.measure();
    let mut tv = 0.0;
    let mut estimate = Complex64::new(0.0, 0.0);
    let mut amp_max: f64 = 0.0;
    for &(lo, hi) in domain.intervals() {
        let len = hi - lo;
        let m = ((PRESCREEN_SAMPLES as f64 * len / measure).ceil() as usize).max(2);
        let step = len / m as f64;
        let mut prev = phase(lo);
        for i in 0..m {
            let z = lo + (i as f64 + 0.5) * step;
            let zr = lo + (i + 1) as f64 * step;
            let pz = phase(zr.min(hi));
            tv += (pz - prev).abs();
            prev = pz;
            let a = amplitude(z);
            amp_max = amp_max.max(a.abs());
            estimate += Complex64::from_polar(a, phase(z)) * step;
        }
    }
    if tv.is_finite() && tv <= budget as f64 * FRAC_PI_4 {
        return None;
    }
    Some(QuadResult { value: estimate, abs_error_estimate: 2.0 * amp_max * measure, panels: 0, converged: false })
}

/// The phase data `(γ, ω, k, P̃_k, x, y)` of one kernel entry.
#[derive(Debug, Clone)]
pub struct PhaseSpec {
    pub curve: Curve,
    pub omega: f64,
    pub k: u32,
    /// `P̃_k`, monic.
    pub poly: Polynomial,
    pub x: f64,
    pub y: f64,
    ln_gamma_omega: f64,
}

impl PhaseSpec {
    pub fn new(curve: Curve, omega: f64, k: u32, poly: Polynomial, x: f64, y: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Invalid(format!("omega must be positive and finite, got {omega}")));
        }
        if !(x.is_finite() && y.is_finite()) || x == y {
            return Err(invalid("x and y must be finite and distinct"));
        }
        if poly.is_zero() || poly.leading() != 1.0 {
            return Err(invalid("the phase polynomial must be monic"));
        }
        let ln_gamma_omega = curve.ln_gamma(omega);
        if !ln_gamma_omega.is_finite() {
            return Err(Error::Range { t: omega });
        }
        Ok(PhaseSpec { curve, omega, k, poly, x, y, ln_gamma_omega })
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    /// `ω·2^k`.
    pub fn scale(&self) -> f64 {
        self.omega * (self.k as f64 * LN_2).exp()
    }

    /// `φ(z) = 2^{nk}(γ(ω2^k(z−x)) − γ(ω2^k(z−y)))/γ(ω)`.
    pub fn phi(&self, z: f64) -> f64 {
        let s = self.scale();
        let ln_scale = self.ln_gamma_omega - (self.degree() as f64 * self.k as f64) * LN_2;
        let a = z - self.x;
        let b = z - self.y;
        if a > 0.0 && b > 0.0 {
            let d = self.y - self.x;
            if d > 0.0 {
                self.curve.increment_scaled(s * b, s * d, ln_scale)
            } else {
                -self.curve.increment_scaled(s * a, -s * d, ln_scale)
            }
        } else {
            (self.curve.gamma_signed(s * a) - self.curve.gamma_signed(s * b)) * (-ln_scale).exp()
        }
    }

    /// `ψ(z) = φ(z)·P̃_k(z)`.
    pub fn psi(&self, z: f64) -> f64 {
        self.phi(z) * self.poly.eval(z)
    }
}

/// The unique `ω > 0` with `|u s|·ωⁿ·γ(ω) = 1`.
pub fn solve_omega(u: f64, s: f64, n: usize, curve: &Curve) -> Result<f64> {
    let us = (u * s).abs();
    if us == 0.0 || !us.is_finite() {
        return Err(invalid("u·s must be finite and nonzero"));
    }
    if n == 0 {
        return Err(invalid("solve_omega needs a polynomial of degree at least 1"));
    }
    if !(curve.ln_gamma(1e6) > curve.ln_gamma(1e3)) {
        return Err(Error::Bracket(format!("curve {} looks bounded", curve.name)));
    }
    let ln_us = us.ln();
    let g = |t: f64| ln_us + n as f64 * t + curve.ln_gamma(t.exp());
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut step = 2.0;
    while !(g(lo) < 0.0) {
        lo -= step;
        step *= 2.0;
        if lo < -745.0 {
            return Err(Error::Bracket(format!("no lower bracket for |us| = {us}")));
        }
    }
    step = 2.0;
    while !(g(hi) > 0.0) {
        hi += step;
        step *= 2.0;
        if hi > 709.0 {
            return Err(Error::Bracket(format!("no upper bracket for |us| = {us}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// `Υ(z) = (γ(s(z−x)) − γ(s(z−y)))/(s(γ'(s(z−x)) − γ'(s(z−y))))`, `s = ω2^k`.
///
/// Both differences are written as integrals of γ' and γ'' over
/// `[z−y, z−x]` and evaluated in log-scaled form.
pub fn upsilon(spec: &PhaseSpec, z: f64) -> Result<f64> {
    let (a, b) = (z - spec.x, z - spec.y);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Invalid(format!("upsilon needs 0 < z−y < z−x, got z = {z}")));
    }
    let s = spec.scale();
    let c = &spec.curve;
    let l1 = c.ln_d1(s * hi).max(c.ln_d1(s * lo));
    let l2 = c.ln_d2(s * hi).max(c.ln_d2(s * lo));
    let num = integrate_graded(|w| (c.ln_d1(s * w) - l1).exp(), lo, hi, 1e-13).value;
    let den = integrate_graded(|w| (c.ln_d2(s * w) - l2).exp(), lo, hi, 1e-13).value;
    if !(den > 1e-300) || !den.is_finite() {
        return Err(Error::Degenerate(format!("γ' is locally constant near s·z = {}", s * hi)));
    }
    Ok(num / den * (l1 - l2 - s.ln()).exp())
}

/// `J^r = ∫_{(y+1, r) \ E_k} e^{iψ(z)} dz`.
pub fn compute_jr(spec: &PhaseSpec, r: f64, ek: &IntervalUnion, opts: OscOptions) -> Result<QuadResult> {
    let (x, y) = (spec.x, spec.y);
    if !(y > x) || !(r - y >= 1.0) || !(r - x <= 2.0) {
        return Err(Error::Invalid(format!("J^r needs 1 ≤ r−y < r−x ≤ 2, got x={x}, y={y}, r={r}")));
    }
    let domain = IntervalUnion::interval(y + 1.0, r).subtract(ek);
    if domain.measure() == 0.0 {
        return Ok(QuadResult::zero());
    }
    Ok(oscillatory_integral_with(|z| spec.psi(z), |_| 1.0, &domain, opts))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    pub k: u32,
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JrCase {
    /// `|P̃_k/P̃_k'| > 4/C1` on the whole domain.
    Ratio,
    /// `(P̃_k/P̃_k')' > 1/(8n)` on the whole domain.
    Slope,
    /// Empty domain, `J^r = 0`.
    Empty,
    Unclassified,
}

impl JrCase {
    pub fn label(&self) -> &'static str {
        match self {
            JrCase::Ratio => "case1",
            JrCase::Slope => "case2",
            JrCase::Empty => "empty",
            JrCase::Unclassified => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JrRow {
    pub entry: SweepEntry,
    pub case: JrCase,
    pub jr_abs: f64,
    /// `|J^r|·(2^{nk}|x−y|)^{1/n}` (case 1) or `^{1/(n+1)}` (case 2).
    pub normalized: f64,
    pub converged: bool,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JrEnvelopeReport {
    pub c_case1: Option<f64>,
    pub c_case2: Option<f64>,
    pub rows: Vec<JrRow>,
    pub skipped: usize,
    pub unconverged: usize,
    pub warning: Option<String>,
}

/// Samples per domain for case classification.
const CLASSIFY_SAMPLES: usize = 64;

fn classify(test: &EkTest, domain: &IntervalUnion) -> JrCase {
    let measure = domain.measure();
    if measure == 0.0 {
        return JrCase::Empty;
    }
    let n = test.q.degree() as f64;
    let mut ratio = true;
    let mut slope = true;
    let mut seen = 0;
    for &(lo, hi) in domain.intervals() {
        let m = ((CLASSIFY_SAMPLES as f64 * (hi - lo) / measure).round() as usize).max(1);
        for i in 0..m {
            let z = lo + (hi - lo) * (i as f64 + 0.5) / m as f64;
            ratio &= test.ratio(z) > 4.0 / test.c1;
            slope &= test.ratio_slope(z) > 1.0 / (8.0 * n);
            seen += 1;
        }
    }
    if seen == 0 {
        JrCase::Empty
    } else if ratio {
        JrCase::Ratio
    } else if slope {
        JrCase::Slope
    } else {
        JrCase::Unclassified
    }
}

/// Empirical constants of the two `J^r` bounds over a sweep.
///
/// `p` is the original polynomial; each entry uses `P̃_k` of its
/// ω-normalization `P(ωx)/(sωⁿ)`. Unconverged rows are kept in `rows` but
/// excluded from the maxima.
pub fn verify_jr_envelope(
    curve: &Curve,
    p: &Polynomial,
    omega: f64,
    c1: f64,
    sweep: &[SweepEntry],
    opts: OscOptions,
) -> Result<JrEnvelopeReport> {
    let n = p.degree();
    if n == 0 {
        return Err(invalid("J^r bounds need a nonconstant polynomial"));
    }
    if !(c1 > 0.0) {
        return Err(invalid("C1 must be positive"));
    }
    let q = p.normalized_at_scale(omega);
    let mut levels: Vec<(u32, EkTest, IntervalUnion)> = Vec::new();
    let mut rows = Vec::with_capacity(sweep.len());
    let (mut c_case1, mut c_case2): (Option<f64>, Option<f64>) = (None, None);
    let (mut skipped, mut unconverged) = (0, 0);
    for e in sweep {
        if !levels.iter().any(|l| l.0 == e.k) {
            let qk = q.rescale(e.k);
            let ek = ek_of_rescaled(qk.clone(), c1, 1e-12);
            levels.push((e.k, EkTest::new(qk, c1), ek));
        }
        let (_, test, ek) = levels.iter().find(|l| l.0 == e.k).expect("level inserted above");
        let spec = PhaseSpec::new(curve.clone(), omega, e.k, test.q.clone(), e.x, e.y)?;
        let domain = IntervalUnion::interval(e.y + 1.0, e.r).subtract(ek);
        let case = classify(test, &domain);
        let q_res = compute_jr(&spec, e.r, ek, opts)?;
        let jr_abs = q_res.value.norm();
        let base = (n as f64 * e.k as f64 * LN_2).exp() * (e.y - e.x);
        let normalized = match case {
            JrCase::Ratio => jr_abs * base.powf(1.0 / n as f64),
            JrCase::Slope => jr_abs * base.powf(1.0 / (n as f64 + 1.0)),
            _ => 0.0,
        };
        if case == JrCase::Unclassified {
            skipped += 1;
        }
        if !q_res.converged {
            unconverged += 1;
        } else {
            let slot = match case {
                JrCase::Ratio => Some(&mut c_case1),
                JrCase::Slope => Some(&mut c_case2),
                _ => None,
            };
            if let Some(s) = slot {
                *s = Some(s.map_or(normalized, |v| v.max(normalized)));
            }
        }
        rows.push(JrRow { entry: *e, case, jr_abs, normalized, converged: q_res.converged, panels: q_res.panels });
    }
    let warning = if !sweep.is_empty() && 2 * skipped > sweep.len() {
        Some(format!("{skipped} of {} entries fit neither case", sweep.len()))
    } else {
        None
    };
    Ok(JrEnvelopeReport { c_case1, c_case2, rows, skipped, unconverged, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_phase_gives_measure() {
        let d = IntervalUnion::new(alloc::vec![(0.0, 1.0), (2.0, 3.0)]);
        let r = oscillatory_integral(|_| 0.0, &d, 1e-9);
        assert!(r.converged);
        assert_relative_eq!(r.value.re, 2.0, epsilon = 1e-14);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn linear_phase_closed_form() {
        let r = oscillatory_integral(|z| 10.0 * z, &IntervalUnion::interval(0.0, 1.0), 1e-9);
        let i = Complex64::new(0.0, 1.0);
        let exact = ((i * 10.0).exp() - 1.0) / (i * 10.0);
        assert!(r.converged);
        assert!((r.value - exact).norm() < 1e-12);
        assert_relative_eq!(r.value.norm(), 2.0 * 5f64.sin().abs() / 10.0, epsilon = 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = OscOptions { tol: 1e-9, max_panels: 50 };
        let r = oscillatory_integral_with(|z| 1e3 * z, |_| 1.0, &IntervalUnion::interval(0.0, 1.0), opts);
        assert!(!r.converged);
        let r = oscillatory_integral_with(|z| 1e6 * z, |_| 1.0, &IntervalUnion::interval(0.0, 1.0), opts);
        assert!(!r.converged);
        assert_eq!(r.panels, 0);
    }

    #[test]
    fn omega_closed_forms() {
        let c = Curve::power(2.0);
        assert_relative_eq!(solve_omega(1.0, 1.0, 2, &c).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(solve_omega(16.0, 1.0, 2, &c).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(solve_omega(1.0, 1.0, 1, &c).unwrap(), 1.0, max_relative = 1e-12);
        assert!(solve_omega(0.0, 1.0, 2, &c).is_err());
    }

    #[test]
    fn upsilon_parabola_is_mean() {
        let p = Polynomial::new(alloc::vec![0.0, 1.0]).unwrap();
        for (omega, k) in [(1.0, 0), (0.01, 7), (300.0, 3)] {
            let spec = PhaseSpec::new(Curve::power(2.0), omega, k, p.clone(), 0.0, 1.0).unwrap();
            assert_relative_eq!(upsilon(&spec, 2.0).unwrap(), 1.5, max_relative = 1e-12);
        }
        let spec = PhaseSpec::new(Curve::power(2.0), 1.0, 0, p, 0.0, 1e-7).unwrap();
        assert_relative_eq!(upsilon(&spec, 1.0 + 1e-7).unwrap(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn upsilon_linear_curve_is_degenerate() {
        let p = Polynomial::new(alloc::vec![0.0, 1.0]).unwrap();
        let spec = PhaseSpec::new(Curve::power(1.0), 1.0, 0, p, 0.0, 0.5).unwrap();
        assert!(matches!(upsilon(&spec, 2.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn phi_parabola() {
        let p = Polynomial::new(alloc::vec![0.0, 1.0]).unwrap();
        let spec = PhaseSpec::new(Curve::power(2.0), 1.0, 0, p.clone(), -1.0, -0.5).unwrap();
        let z = 0.7;
        assert_relative_eq!(spec.phi(z), (z + 1.0) * (z + 1.0) - (z + 0.5) * (z + 0.5), max_relative = 1e-13);
        let swapped = PhaseSpec::new(Curve::power(2.0), 1.0, 0, p, -0.5, -1.0).unwrap();
        assert_relative_eq!(swapped.phi(z), -spec.phi(z), max_relative = 1e-13);
    }

    #[test]
    fn jr_empty_domain() {
        let p = Polynomial::new(alloc::vec![0.0, 1.0]).unwrap();
        let spec = PhaseSpec::new(Curve::power(2.0), 1.0, 0, p, -1.0, -0.5).unwrap();
        let r = compute_jr(&spec, 0.5, &IntervalUnion::empty(), OscOptions::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert!(r.converged);
        assert!(compute_jr(&spec, 1.2, &IntervalUnion::empty(), OscOptions::default()).is_err());
    }
}
