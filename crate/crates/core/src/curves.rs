//! Curves γ on `[0, ∞)` extended to ℝ by parity, and the curvature
//! conditions compared in the literature.
//!
//! Derivatives are evaluated in log space (`ln γ'`, `ln γ''`) so that flat
//! curves such as `∫ e^{τ - 1/τ}` stay usable far beyond the range where the
//! raw values overflow or underflow.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::fit::linear_fit;
use crate::quad::{integrate, integrate_graded};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Parametric families. Integral families define γ as `∫_0^t g(τ) dτ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFamily {
    /// `t^α`
    Power { alpha: f64 },
    /// `t^α ln(1+t)`
    PowerLog { alpha: f64 },
    /// `t^α e^{-1/t}`
    PowerExpInv { alpha: f64 },
    /// `∫ τ^α ln(1+τ)`
    IntPowerLog { alpha: f64 },
    /// `∫ τ^α e^{-1/τ}`
    IntPowerExpInv { alpha: f64 },
    /// `∫ τ^α arctan τ`
    IntPowerAtan { alpha: f64 },
    /// `∫ e^{τ} e^{-1/τ}`
    IntExpExpInv,
}

impl CurveFamily {
    /// Family by config name, e.g. `("power-log", 2.0)`.
    pub fn from_name(family: &str, alpha: Option<f64>) -> Result<Self> {
        let a = || alpha.ok_or_else(|| Error::Invalid(format!("family '{family}' needs alpha")));
        let fam = match family {
            "power" => CurveFamily::Power { alpha: a()? },
            "power-log" => CurveFamily::PowerLog { alpha: a()? },
            "power-exp-inv" => CurveFamily::PowerExpInv { alpha: a()? },
            "int-power-log" => CurveFamily::IntPowerLog { alpha: a()? },
            "int-power-exp-inv" => CurveFamily::IntPowerExpInv { alpha: a()? },
            "int-power-atan" => CurveFamily::IntPowerAtan { alpha: a()? },
            "int-exp-exp-inv" => CurveFamily::IntExpExpInv,
            _ => return Err(Error::Invalid(format!("unknown curve family '{family}'"))),
        };
        if let Some(al) = fam.alpha() {
            if !(al >= 1.0) || !al.is_finite() {
                return Err(Error::Invalid(format!("alpha must be a finite number >= 1, got {al}")));
            }
        }
        Ok(fam)
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            CurveFamily::Power { alpha }
            | CurveFamily::PowerLog { alpha }
            | CurveFamily::PowerExpInv { alpha }
            | CurveFamily::IntPowerLog { alpha }
            | CurveFamily::IntPowerExpInv { alpha }
            | CurveFamily::IntPowerAtan { alpha } => Some(alpha),
            CurveFamily::IntExpExpInv => None,
        }
    }

    pub fn is_integral(&self) -> bool {
        matches!(
            self,
            CurveFamily::IntPowerLog { .. }
                | CurveFamily::IntPowerExpInv { .. }
                | CurveFamily::IntPowerAtan { .. }
                | CurveFamily::IntExpExpInv
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub family: CurveFamily,
    pub parity: Parity,
    pub name: String,
}

/// Names of the built-in curves, in corpus order.
pub const BUILTIN_NAMES: [&str; 9] = [
    "t2-log1p",
    "t2-exp-inv",
    "int-t-log1p",
    "int-t-exp-inv",
    "int-t-atan",
    "counterexample",
    "power-1.5",
    "power-2",
    "power-3",
];

fn ln1p(x: f64) -> f64 {
    x.ln_1p()
}

impl Curve {
    pub fn new(family: CurveFamily, parity: Parity, name: &str) -> Self {
        Curve { family, parity, name: name.to_string() }
    }

    pub fn power(alpha: f64) -> Self {
        Curve::new(CurveFamily::Power { alpha }, Parity::Even, &format!("power-{alpha}"))
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    /// Built-in curve by name, with even parity.
    pub fn builtin(name: &str) -> Option<Curve> {
        let fam = match name {
            "t2-log1p" => CurveFamily::PowerLog { alpha: 2.0 },
            "t2-exp-inv" => CurveFamily::PowerExpInv { alpha: 2.0 },
            "int-t-log1p" => CurveFamily::IntPowerLog { alpha: 1.0 },
            "int-t-exp-inv" => CurveFamily::IntPowerExpInv { alpha: 1.0 },
            "int-t-atan" => CurveFamily::IntPowerAtan { alpha: 1.0 },
            "counterexample" => CurveFamily::IntExpExpInv,
            "power-1.5" => CurveFamily::Power { alpha: 1.5 },
            "power-2" => CurveFamily::Power { alpha: 2.0 },
            "power-3" => CurveFamily::Power { alpha: 3.0 },
            _ => return None,
        };
        Some(Curve::new(fam, Parity::Even, name))
    }

    /// All built-in curves.
    pub fn corpus() -> Vec<Curve> {
        BUILTIN_NAMES.iter().filter_map(|n| Curve::builtin(n)).collect()
    }

    /// The five example curves followed by the counterexample curve.
    pub fn example_set() -> Vec<Curve> {
        BUILTIN_NAMES[..6].iter().filter_map(|n| Curve::builtin(n)).collect()
    }

    /// `ln γ'(t)` for `t > 0`.
    pub fn ln_d1(&self, t: f64) -> f64 {
        let lt = t.ln();
        match self.family {
            CurveFamily::Power { alpha: a } => a.ln() + (a - 1.0) * lt,
            CurveFamily::PowerLog { alpha: a } => (a - 1.0) * lt + (a * ln1p(t) + t / (1.0 + t)).ln(),
            CurveFamily::PowerExpInv { alpha: a } => -1.0 / t + (a - 2.0) * lt + (a * t + 1.0).ln(),
            CurveFamily::IntPowerLog { alpha: a } => a * lt + ln1p(t).ln(),
            CurveFamily::IntPowerExpInv { alpha: a } => a * lt - 1.0 / t,
            CurveFamily::IntPowerAtan { alpha: a } => a * lt + t.atan().ln(),
            CurveFamily::IntExpExpInv => t - 1.0 / t,
        }
    }

    /// `ln γ''(t)` for `t > 0`; `-∞` where γ'' vanishes.
    pub fn ln_d2(&self, t: f64) -> f64 {
        let lt = t.ln();
        match self.family {
            CurveFamily::Power { alpha: a } => {
                let c = a * (a - 1.0);
                if c == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    c.ln() + (a - 2.0) * lt
                }
            }
            CurveFamily::PowerLog { alpha: a } => {
                let q = 1.0 + t;
                (a - 2.0) * lt + (a * (a - 1.0) * ln1p(t) + 2.0 * a * t / q - t * t / (q * q)).ln()
            }
            CurveFamily::PowerExpInv { alpha: a } => {
                -1.0 / t + (a - 4.0) * lt + (a * (a - 1.0) * t * t + 2.0 * (a - 1.0) * t + 1.0).ln()
            }
            CurveFamily::IntPowerLog { alpha: a } => (a - 1.0) * lt + (a * ln1p(t) + t / (1.0 + t)).ln(),
            CurveFamily::IntPowerExpInv { alpha: a } => -1.0 / t + (a - 2.0) * lt + (a * t + 1.0).ln(),
            CurveFamily::IntPowerAtan { alpha: a } => {
                (a - 1.0) * lt + (a * t.atan() + t / (1.0 + t * t)).ln()
            }
            CurveFamily::IntExpExpInv => t - 1.0 / t + ln1p(1.0 / (t * t)),
        }
    }

    /// `γ'''(t)` for `t > 0`. Every built-in family provides it.
    pub fn d3(&self, t: f64) -> Option<f64> {
        let lt = t.ln();
        let v = match self.family {
            CurveFamily::Power { alpha: a } => a * (a - 1.0) * (a - 2.0) * (lt * (a - 3.0)).exp(),
            CurveFamily::PowerLog { alpha: a } => {
                let q = 1.0 + t;
                let b = a * (a - 1.0) * (a - 2.0) * ln1p(t) + 3.0 * a * (a - 1.0) * t / q
                    - 3.0 * a * t * t / (q * q)
                    + 2.0 * t * t * t / (q * q * q);
                ((a - 3.0) * lt).exp() * b
            }
            CurveFamily::PowerExpInv { alpha: a } => {
                let qq = a * (a - 1.0) * t * t + 2.0 * (a - 1.0) * t + 1.0;
                let dq = 2.0 * a * (a - 1.0) * t + 2.0 * (a - 1.0);
                (-1.0 / t + (a - 6.0) * lt).exp() * (qq + (a - 4.0) * t * qq + t * t * dq)
            }
            CurveFamily::IntPowerLog { alpha: a } => {
                let q = 1.0 + t;
                ((a - 2.0) * lt).exp() * (a * (a - 1.0) * ln1p(t) + 2.0 * a * t / q - t * t / (q * q))
            }
            CurveFamily::IntPowerExpInv { alpha: a } => {
                (-1.0 / t + (a - 4.0) * lt).exp()
                    * (a * (a - 1.0) * t * t + 2.0 * (a - 1.0) * t + 1.0)
            }
            CurveFamily::IntPowerAtan { alpha: a } => {
                let q = 1.0 + t * t;
                ((a - 2.0) * lt).exp()
                    * (a * (a - 1.0) * t.atan() + 2.0 * a * t / q - 2.0 * t * t * t / (q * q))
            }
            CurveFamily::IntExpExpInv => {
                let u = 1.0 / t;
                (t - u).exp() * (1.0 + 2.0 * u * u - 2.0 * u * u * u + u * u * u * u)
            }
        };
        Some(v)
    }

    /// `γ(t)/γ'(t)` for `t > 0`; quadrature for integral families.
    pub fn gamma_over_d1(&self, t: f64) -> f64 {
        match self.family {
            CurveFamily::Power { alpha: a } => t / a,
            CurveFamily::PowerLog { alpha: a } => {
                let l = ln1p(t);
                t * l / (a * l + t / (1.0 + t))
            }
            CurveFamily::PowerExpInv { alpha: a } => t * t / (a * t + 1.0),
            _ => {
                let l1t = self.ln_d1(t);
                integrate_graded(|tau| (self.ln_d1(tau) - l1t).exp(), 0.0, t, 1e-14).value
            }
        }
    }

    /// `ln γ(t)` for `t > 0`.
    pub fn ln_gamma(&self, t: f64) -> f64 {
        match self.family {
            CurveFamily::Power { alpha: a } => a * t.ln(),
            CurveFamily::PowerLog { alpha: a } => a * t.ln() + ln1p(t).ln(),
            CurveFamily::PowerExpInv { alpha: a } => a * t.ln() - 1.0 / t,
            _ => self.ln_d1(t) + self.gamma_over_d1(t).ln(),
        }
    }

    /// `(γ(b + eps) − γ(b))·e^{-ln_scale}` for `b ≥ 0`, `eps ≥ 0`, without
    /// cancellation when `eps ≪ b`.
    pub fn increment_scaled(&self, b: f64, eps: f64, ln_scale: f64) -> f64 {
        if eps <= 0.0 {
            return 0.0;
        }
        let a = b + eps;
        let diff = match self.family {
            CurveFamily::Power { alpha: al } => al * ln1p(eps / b),
            CurveFamily::PowerLog { alpha: al } => {
                let lb = ln1p(b);
                al * ln1p(eps / b) + ln1p(ln1p(eps / (1.0 + b)) / lb)
            }
            CurveFamily::PowerExpInv { alpha: al } => al * ln1p(eps / b) + eps / (b * a),
            _ => {
                let f = |w: f64| (self.ln_d1(w) - ln_scale).exp();
                let r = integrate(f, b, a, 0.0, 1e-14, 64);
                if r.converged {
                    return r.value;
                }
                return integrate_graded(f, b, a, 1e-14).value;
            }
        };
        (self.ln_gamma(a) - ln_scale).exp() * -(-diff).exp_m1()
    }

    /// `γ(b + eps) − γ(b)` on the positive axis.
    pub fn increment(&self, b: f64, eps: f64) -> f64 {
        self.increment_scaled(b, eps, 0.0)
    }

    fn sign_for(&self, order: u8) -> f64 {
        let parity = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        if order % 2 == 0 {
            parity
        } else {
            -parity
        }
    }

    fn d2_right_limit(&self) -> Result<f64> {
        let v = match self.family {
            CurveFamily::Power { alpha } => {
                if alpha == 2.0 {
                    2.0
                } else if alpha > 2.0 || alpha == 1.0 {
                    0.0
                } else {
                    return Err(Error::Range { t: 0.0 });
                }
            }
            CurveFamily::PowerLog { alpha } => {
                if alpha == 1.0 {
                    2.0
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
        Ok(v)
    }

    /// γ, γ' or γ'' at any real `t`, parity-extended to `t < 0`.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if order > 2 {
            return Err(invalid("derivative order must be 0, 1 or 2"));
        }
        if t.is_nan() {
            return Err(Error::Range { t });
        }
        if t == 0.0 {
            return if order == 2 { self.d2_right_limit() } else { Ok(0.0) };
        }
        let s = t.abs();
        let v = match order {
            0 => self.ln_gamma(s).exp(),
            1 => self.ln_d1(s).exp(),
            _ => self.ln_d2(s).exp(),
        };
        if !v.is_finite() {
            return Err(Error::Range { t });
        }
        Ok(if t < 0.0 { self.sign_for(order) * v } else { v })
    }

    /// γ at any real `t` with overflow mapped to ±∞ instead of an error.
    pub fn gamma_signed(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let v = self.ln_gamma(t.abs()).exp();
        if t < 0.0 {
            self.sign_for(0) * v
        } else {
            v
        }
    }
}

/// Free-function form of [`Curve::eval`].
pub fn eval_curve(curve: &Curve, t: f64, order: u8) -> Result<f64> {
    curve.eval(t, order)
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// 2000 log-spaced points on `[1e-4, 1e4]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 2000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    I,
    II,
    III,
    IV,
    Cww,
    Cz,
    Wcz,
    D,
    Id,
}

impl Condition {
    pub const ALL: [Condition; 9] = [
        Condition::I,
        Condition::II,
        Condition::III,
        Condition::IV,
        Condition::Cww,
        Condition::Cz,
        Condition::Wcz,
        Condition::D,
        Condition::Id,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Condition::I => "(i)",
            Condition::II => "(ii)",
            Condition::III => "(iii)",
            Condition::IV => "(iv)",
            Condition::Cww => "CWW",
            Condition::Cz => "CZ",
            Condition::Wcz => "wCZ",
            Condition::D => "D",
            Condition::Id => "ID",
        }
    }

    fn index(&self) -> usize {
        Condition::ALL.iter().position(|c| c == self).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The evaluator broke down; not a mathematical violation.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub condition: Condition,
    pub t: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub curve: String,
    statuses: [Option<Status>; 9],
    /// Grid infimum of `tγ''/γ'`.
    pub c1: f64,
    pub lambda_d: f64,
    pub eps0: f64,
    /// Grid infimum of `-t²(γ''/γ')'`, the best CZ constant.
    pub cz_lambda: f64,
    /// Grid infimum of `t(γ''/γ'(t) − γ''/γ'(2t))`.
    pub wcz_lambda: f64,
    /// Consecutive grid steps where `γ''/γ'` is exactly flat.
    pub zero_steps_ii: usize,
    /// `(t, h(t))` with `h = tγ' − γ`.
    pub h_values: Vec<(f64, f64)>,
    pub witnesses: Vec<Witness>,
}

impl ConditionReport {
    fn new(curve: &Curve) -> Self {
        ConditionReport {
            curve: curve.name.clone(),
            statuses: [None; 9],
            c1: f64::NAN,
            lambda_d: f64::NAN,
            eps0: f64::NAN,
            cz_lambda: f64::NAN,
            wcz_lambda: f64::NAN,
            zero_steps_ii: 0,
            h_values: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn status(&self, c: Condition) -> Option<Status> {
        self.statuses[c.index()]
    }

    pub fn passes(&self, c: Condition) -> bool {
        self.status(c) == Some(Status::Pass)
    }

    pub fn witnesses_for(&self, c: Condition) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(move |w| w.condition == c)
    }

    fn set(&mut self, c: Condition, s: Status, witness: Option<(f64, f64)>) {
        self.statuses[c.index()] = Some(s);
        if let Some((t, magnitude)) = witness {
            self.witnesses.push(Witness { condition: c, t, magnitude });
        }
    }

    fn merge(&mut self, other: ConditionReport) {
        for c in Condition::ALL {
            if let Some(s) = other.status(c) {
                self.statuses[c.index()] = Some(s);
            }
        }
        self.witnesses.extend(other.witnesses);
        for (dst, src) in [
            (&mut self.c1, other.c1),
            (&mut self.lambda_d, other.lambda_d),
            (&mut self.eps0, other.eps0),
            (&mut self.cz_lambda, other.cz_lambda),
            (&mut self.wcz_lambda, other.wcz_lambda),
        ] {
            if !src.is_nan() {
                *dst = src;
            }
        }
        self.zero_steps_ii = self.zero_steps_ii.max(other.zero_steps_ii);
        if !other.h_values.is_empty() {
            self.h_values = other.h_values;
        }
    }
}

const MONO_TOL: f64 = 1e-9;
const TAIL_SLOPE: f64 = 0.25;

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 100 {
        return Err(Error::Invalid(format!("grid needs at least 100 points, got {}", grid.len())));
    }
    if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(invalid("grid points must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    if (grid[grid.len() - 1] / grid[0]).log10() < 4.0 - 1e-9 {
        return Err(invalid("grid must span at least 4 decades"));
    }
    Ok(())
}

/// Log-log slope of `vals` over the first and last decade of `ts`; returns
/// the grid end where the values decay to zero like a power, if any.
fn vanishing_tail(ts: &[f64], vals: &[f64]) -> Option<(f64, f64)> {
    let n = ts.len();
    let (lo, hi) = (ts[0], ts[n - 1]);
    let tail = |pick: &dyn Fn(f64) -> bool| -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (t, v) in ts.iter().zip(vals) {
            if pick(*t) && *v > 0.0 {
                xs.push(t.ln());
                ys.push(v.ln());
            }
        }
        if xs.len() < 3 {
            return None;
        }
        Some(linear_fit(&xs, &ys).0)
    };
    if let Some(s) = tail(&|t| t >= hi / 10.0) {
        if s <= -TAIL_SLOPE {
            return Some((hi, vals[n - 1]));
        }
    }
    if let Some(s) = tail(&|t| t <= lo * 10.0) {
        if s >= TAIL_SLOPE {
            return Some((lo, vals[0]));
        }
    }
    None
}

/// Infimum-with-tail test shared by (iii), CWW, CZ and wCZ.
fn bounded_below(ts: &[f64], vals: &[f64]) -> (f64, Option<(f64, f64)>) {
    let (mut imin, mut vmin) = (0, f64::INFINITY);
    for (i, v) in vals.iter().enumerate() {
        if *v < vmin {
            vmin = *v;
            imin = i;
        }
    }
    if !(vmin > 0.0) {
        return (vmin, Some((ts[imin], vmin)));
    }
    (vmin, vanishing_tail(ts, vals))
}

/// First index where the sequence rises by more than the relative tolerance.
fn first_increase(vals: &[f64]) -> (Option<usize>, usize) {
    let mut zeros = 0;
    let mut first = None;
    for i in 1..vals.len() {
        let d = vals[i] - vals[i - 1];
        if d == 0.0 {
            zeros += 1;
        }
        let scale = vals[i].abs().max(vals[i - 1].abs());
        if d > MONO_TOL * scale && first.is_none() {
            first = Some(i);
        }
    }
    (first, zeros)
}

struct Samples {
    r: Vec<f64>,
    tr: Vec<f64>,
    bad: Option<usize>,
}

fn ratio_samples(curve: &Curve, grid: &[f64]) -> Samples {
    let mut r = Vec::with_capacity(grid.len());
    let mut tr = Vec::with_capacity(grid.len());
    let mut bad = None;
    for (i, &t) in grid.iter().enumerate() {
        let l1 = curve.ln_d1(t);
        let l2 = curve.ln_d2(t);
        let v = (l2 - l1).exp();
        if !l1.is_finite() || l2.is_nan() || !v.is_finite() {
            bad.get_or_insert(i);
        }
        r.push(v);
        tr.push(t * v);
    }
    Samples { r, tr, bad }
}

fn ratio_at(curve: &Curve, t: f64) -> f64 {
    (curve.ln_d2(t) - curve.ln_d1(t)).exp()
}

/// Conditions (i)–(iv) and the estimate of `C1`.
pub fn check_theorem_conditions(curve: &Curve, grid: &[f64]) -> Result<ConditionReport> {
    validate_grid(grid)?;
    let mut rep = ConditionReport::new(curve);

    // (i): right limits of γ and γ' on a geometric grid down to 1e-8.
    let near0 = log_grid(1e-8, 1e-2, 25);
    let mut ok_i = true;
    for lnv in [
        near0.iter().map(|&t| curve.ln_gamma(t)).collect::<Vec<_>>(),
        near0.iter().map(|&t| curve.ln_d1(t)).collect::<Vec<_>>(),
    ] {
        let v0 = lnv[0].exp();
        if v0 <= 1e-6 {
            continue;
        }
        let xs: Vec<f64> = near0.iter().map(|t| t.ln()).collect();
        let slope = linear_fit(&xs, &lnv).0;
        if !(slope >= 0.05) {
            ok_i = false;
            rep.witnesses.push(Witness { condition: Condition::I, t: near0[0], magnitude: v0 });
        }
    }
    rep.statuses[Condition::I.index()] = Some(if ok_i { Status::Pass } else { Status::Fail });

    let s = ratio_samples(curve, grid);
    if let Some(i) = s.bad {
        rep.set(Condition::II, Status::Indeterminate, Some((grid[i], s.r[i])));
        rep.set(Condition::III, Status::Indeterminate, Some((grid[i], s.tr[i])));
    } else {
        let (inc, zeros) = first_increase(&s.r);
        rep.zero_steps_ii = zeros;
        match inc {
            None => rep.set(Condition::II, Status::Pass, None),
            Some(i) => rep.set(Condition::II, Status::Fail, Some((grid[i], s.r[i] - s.r[i - 1]))),
        }
        let (c1, w) = bounded_below(grid, &s.tr);
        rep.c1 = c1;
        match w {
            None => rep.set(Condition::III, Status::Pass, None),
            Some(w) => rep.set(Condition::III, Status::Fail, Some(w)),
        }
    }

    // (iv): sign of γ''' when provided, else monotone ln γ''.
    let mut status = Status::Pass;
    let mut witness = None;
    if curve.d3(grid[0]).is_some() {
        let d3: Vec<f64> = grid.iter().map(|&t| curve.d3(t).unwrap_or(f64::NAN)).collect();
        if let Some(i) = d3.iter().position(|v| v.is_nan()) {
            status = Status::Indeterminate;
            witness = Some((grid[i], f64::NAN));
        } else {
            let pos = d3.iter().position(|&v| v > 0.0);
            let neg = d3.iter().position(|&v| v < 0.0);
            if let (Some(p), Some(n)) = (pos, neg) {
                status = Status::Fail;
                let i = p.max(n);
                witness = Some((grid[i], d3[i]));
            }
        }
    } else {
        let l2: Vec<f64> = grid.iter().map(|&t| curve.ln_d2(t)).collect();
        let up = l2.windows(2).position(|w| w[1] - w[0] > MONO_TOL);
        let down = l2.windows(2).position(|w| w[1] - w[0] < -MONO_TOL);
        if let (Some(u), Some(d)) = (up, down) {
            status = Status::Fail;
            let i = u.max(d) + 1;
            witness = Some((grid[i], l2[i] - l2[i - 1]));
        }
    }
    rep.set(Condition::IV, status, witness);
    Ok(rep)
}

/// CWW, CZ and wCZ (the latter on pairs `s = 2t`).
pub fn check_literature_conditions(curve: &Curve, grid: &[f64]) -> Result<ConditionReport> {
    validate_grid(grid)?;
    let mut rep = ConditionReport::new(curve);
    let s = ratio_samples(curve, grid);
    if let Some(i) = s.bad {
        for c in [Condition::Cww, Condition::Cz, Condition::Wcz] {
            rep.set(c, Status::Indeterminate, Some((grid[i], s.r[i])));
        }
        return Ok(rep);
    }

    let (inc, _) = first_increase(&s.tr);
    let (c1, tail) = bounded_below(grid, &s.tr);
    rep.c1 = c1;
    match (inc, tail) {
        (None, None) => rep.set(Condition::Cww, Status::Pass, None),
        (Some(i), _) => rep.set(Condition::Cww, Status::Fail, Some((grid[i], s.tr[i] - s.tr[i - 1]))),
        (None, Some(w)) => rep.set(Condition::Cww, Status::Fail, Some(w)),
    }

    let delta = 1e-3;
    let q: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let (tp, tm) = (t * delta.exp(), t * (-delta).exp());
            -t * t * (ratio_at(curve, tp) - ratio_at(curve, tm)) / (tp - tm)
        })
        .collect();
    let (lam, w) = bounded_below(grid, &q);
    rep.cz_lambda = lam.max(0.0);
    match w {
        None if lam.is_finite() => rep.set(Condition::Cz, Status::Pass, None),
        None => rep.set(Condition::Cz, Status::Indeterminate, Some((grid[0], lam))),
        Some(w) => rep.set(Condition::Cz, Status::Fail, Some(w)),
    }

    let wv: Vec<f64> = grid.iter().zip(&s.r).map(|(&t, &r)| t * (r - ratio_at(curve, 2.0 * t))).collect();
    let (lw, w) = bounded_below(grid, &wv);
    rep.wcz_lambda = lw.max(0.0);
    match w {
        None if lw.is_finite() => rep.set(Condition::Wcz, Status::Pass, None),
        None => rep.set(Condition::Wcz, Status::Indeterminate, Some((grid[0], lw))),
        Some(w) => rep.set(Condition::Wcz, Status::Fail, Some(w)),
    }
    Ok(rep)
}

/// Outcome of the doubling checks with `λ = e^{2/C1}` and `ε0 = C1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    pub lambda: f64,
    pub eps0: f64,
    pub d_holds: bool,
    pub id_holds: bool,
    pub h_values: Vec<(f64, f64)>,
    pub witnesses: Vec<Witness>,
}

/// (D) `γ'(λt) ≥ 2γ'(t)` and (ID) `h'(t) ≥ C1 h(t)/t`, pointwise on the grid
/// with relative tolerance 1e-9.
pub fn check_doubling(curve: &Curve, c1: f64, grid: &[f64]) -> Result<DoublingReport> {
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::Invalid(format!("C1 must be positive, got {c1}")));
    }
    let lambda = (2.0 / c1).exp();
    let slack = (1.0 - MONO_TOL).ln();
    let mut rep = DoublingReport {
        lambda,
        eps0: c1,
        d_holds: true,
        id_holds: true,
        h_values: Vec::with_capacity(grid.len()),
        witnesses: Vec::new(),
    };
    for &t in grid {
        let gain = curve.ln_d1(lambda * t) - curve.ln_d1(t);
        if !(gain >= core::f64::consts::LN_2 + slack) {
            if rep.d_holds {
                rep.witnesses.push(Witness { condition: Condition::D, t, magnitude: gain });
            }
            rep.d_holds = false;
        }
        // Divided by γ': h'/γ' = t·r and h/(t γ') = 1 − (γ/γ')/t.
        let l1 = curve.ln_d1(t);
        let tr = t * (curve.ln_d2(t) - l1).exp();
        let g = curve.gamma_over_d1(t);
        let rhs = c1 * (1.0 - g / t);
        if !(tr >= rhs * (1.0 - MONO_TOL)) {
            if rep.id_holds {
                rep.witnesses.push(Witness { condition: Condition::Id, t, magnitude: rhs - tr });
            }
            rep.id_holds = false;
        }
        rep.h_values.push((t, l1.exp() * (t - g)));
    }
    Ok(rep)
}

/// Every condition on one grid: (i)–(iv), CWW, CZ, wCZ, and (D)/(ID) with
/// the estimated `C1` when (iii) passes.
pub fn check_all(curve: &Curve, grid: &[f64]) -> Result<ConditionReport> {
    let mut rep = check_theorem_conditions(curve, grid)?;
    rep.merge(check_literature_conditions(curve, grid)?);
    if rep.passes(Condition::III) {
        let d = check_doubling(curve, rep.c1, grid)?;
        rep.lambda_d = d.lambda;
        rep.eps0 = d.eps0;
        let dw = d.witnesses.iter().find(|w| w.condition == Condition::D).map(|w| (w.t, w.magnitude));
        let iw = d.witnesses.iter().find(|w| w.condition == Condition::Id).map(|w| (w.t, w.magnitude));
        rep.set(Condition::D, if d.d_holds { Status::Pass } else { Status::Fail }, dw);
        rep.set(Condition::Id, if d.id_holds { Status::Pass } else { Status::Fail }, iw);
        rep.h_values = d.h_values;
    } else {
        let w = Some((grid[0], rep.c1));
        rep.set(Condition::D, Status::Indeterminate, w);
        rep.set(Condition::Id, Status::Indeterminate, w);
    }
    Ok(rep)
}

/// Integrand of an integral family at `t > 0` (γ' itself).
pub fn integrand(curve: &Curve, t: f64) -> f64 {
    curve.ln_d1(t).exp()
}
