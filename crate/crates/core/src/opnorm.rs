//! Discretized `S_u`, its dyadic pieces, norm estimation and the 2D
//! operator `H_{P,γ}` with its Fourier-sliced counterpart.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::curves::Curve;
use crate::error::{invalid, Error, Result};
use crate::intervals::IntervalUnion;
use crate::poly::{ek_of_rescaled, Polynomial};
use crate::rng::{seeded, signed_log_uniform, DEFAULT_SEED};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Matrix-vector products with an operator and its adjoint.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = M x`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// `y = M* x`.
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]);
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest singular value by a dense SVD.
    pub fn svd_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let m = DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        m.singular_values().max()
    }
}

impl LinearOperator for CMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (a, b) in self.row(i).iter().zip(x) {
                acc += a * b;
            }
            *yi = acc;
        }
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for (i, xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a.conj() * xi;
            }
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    /// Keeps the entries of `m` selected by `keep(i, j)`.
    pub fn select<F: FnMut(usize, usize) -> bool>(m: &CMatrix, mut keep: F) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows {
            for j in 0..m.cols {
                if keep(i, j) {
                    col_idx.push(j);
                    values.push(m.get(i, j));
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { rows: m.rows, cols: m.cols, row_ptr, col_idx, values }
    }

    /// Same pattern and values with the rows outside `keep_row` dropped.
    pub fn mask_rows<F: FnMut(usize) -> bool>(&self, mut keep_row: F) -> Self {
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.rows {
            if keep_row(i) {
                let r = self.row_ptr[i]..self.row_ptr[i + 1];
                col_idx.extend_from_slice(&self.col_idx[r.clone()]);
                values.extend_from_slice(&self.values[r]);
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { rows: self.rows, cols: self.cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Number of rows holding at least one stored entry.
    pub fn occupied_rows(&self) -> usize {
        self.row_ptr.windows(2).filter(|w| w[1] > w[0]).count()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m.set(i, self.col_idx[p], self.values[p]);
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a + v.norm_sqr()).sqrt()
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for (i, xi) in x.iter().enumerate() {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[p]] += self.values[p].conj() * xi;
            }
        }
    }
}

/// Uniform grid `x_i = −T + i·h`, `i = 0..2T/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    pub extent: f64,
    pub step: f64,
}

impl Grid1d {
    pub fn new(extent: f64, step: f64) -> Result<Self> {
        if !(extent > 0.0 && step > 0.0 && extent.is_finite()) {
            return Err(invalid("grid extent and step must be positive"));
        }
        let n = 2.0 * extent / step;
        if (n - n.round()).abs() > 1e-9 * n || n.round() < 2.0 {
            return Err(invalid("2·extent/step must be an integer of at least 2"));
        }
        Ok(Grid1d { extent, step })
    }

    pub fn len(&self) -> usize {
        (2.0 * self.extent / self.step).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.step
    }
}

/// Data of `S_u f(x) = p.v.∫ e^{−iuP(x)γ(y)} f(x−y) dy/y` on a grid.
#[derive(Debug, Clone)]
pub struct SuConfig {
    pub poly: Polynomial,
    pub u: f64,
    pub curve: Curve,
    pub grid: Grid1d,
    /// Half-width of the excluded neighbourhood of `y = 0`; `h/2`.
    pub pv_epsilon: f64,
}

impl SuConfig {
    pub fn new(poly: Polynomial, u: f64, curve: Curve, grid: Grid1d) -> Self {
        let pv_epsilon = grid.step / 2.0;
        SuConfig { poly, u, curve, grid, pv_epsilon }
    }
}

/// `M[i][j] = e^{−iuP(x_i)γ(x_i−x_j)}·h/(x_i−x_j)` with the singular node
/// dropped. Offsets are integer multiples of `h`, so the `±y` pairs are
/// exact and `u = 0` gives an exactly antisymmetric matrix.
pub fn discretize_su(cfg: &SuConfig) -> Result<CMatrix> {
    let n = cfg.grid.len();
    let h = cfg.grid.step;
    let gammas = offset_gammas(&cfg.curve, n, h)?;
    let phase_rows: Vec<f64> = (0..n).map(|i| cfg.u * cfg.poly.eval(cfg.grid.node(i))).collect();
    build_su(n, h, cfg.pv_epsilon, &gammas, &phase_rows)
}

/// `γ(m·h)` for `m = −(n−1)..=(n−1)`, stored at index `m + n − 1`.
fn offset_gammas(curve: &Curve, n: usize, h: f64) -> Result<Vec<f64>> {
    let mut g = vec![0.0; 2 * n - 1];
    for m in 1..n {
        let t = m as f64 * h;
        let pos = curve.eval(t, 0)?;
        let neg = curve.eval(-t, 0)?;
        g[n - 1 + m] = pos;
        g[n - 1 - m] = neg;
    }
    Ok(g)
}

fn build_su(n: usize, h: f64, eps: f64, gammas: &[f64], phase_rows: &[f64]) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let c = phase_rows[i];
        if !c.is_finite() {
            return Err(Error::Range { t: c });
        }
        for j in 0..n {
            let off = i as i64 - j as i64;
            if (off as f64 * h).abs() <= eps {
                continue;
            }
            let g = gammas[(n as i64 - 1 + off) as usize];
            let w = 1.0 / off as f64;
            m.data[i * n + j] = Complex64::from_polar(w, -c * g);
        }
    }
    Ok(m)
}

/// One dyadic shell `2^k < |x−y|/ω ≤ 2^{k+1}` of the decomposition.
#[derive(Debug, Clone)]
pub struct Shell {
    pub k: u32,
    /// `S_k`: both orientations.
    pub full: SparseMatrix,
    /// `S̃_k`: the half `x − y > 0`.
    pub half: SparseMatrix,
    /// Rows of `S̃_k` with `x/(ω2^k) ∈ E_k`.
    pub half_a: SparseMatrix,
    /// Rows of `S̃_k` with `x/(ω2^k) ∉ E_k`.
    pub half_b: SparseMatrix,
    pub ek: IntervalUnion,
    /// Grid nodes across one shell width.
    pub nodes_per_shell: usize,
    /// Fewer than 16 nodes per shell.
    pub coarse: bool,
    /// The shell reaches past the grid diameter.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub omega: f64,
    /// `|x−y|/ω ≤ 1`.
    pub s1: SparseMatrix,
    pub shells: Vec<Shell>,
}

/// Splits the discretized `S_u` into the local part and dyadic shells
/// measured in the ω-normalized distance `|x−y|/ω`.
///
/// Shells are kept until they cover the grid diameter, so the pieces
/// partition the matrix. Masks use `E_k` of `P̃_k` for the normalized
/// polynomial `P(ωx)/(sωⁿ)` evaluated at `x/(ω2^k)`; constant polynomials
/// have no exceptional set.
pub fn decompose_su(cfg: &SuConfig, omega: f64, c1: f64) -> Result<Decomposition> {
    if !(omega > 0.0) || !(c1 > 0.0) {
        return Err(invalid("omega and C1 must be positive"));
    }
    let m = discretize_su(cfg)?;
    let n = cfg.grid.len();
    let h = cfg.grid.step;
    let dist = |i: usize, j: usize| (i as i64 - j as i64).unsigned_abs() as f64 * h / omega;
    let s1 = SparseMatrix::select(&m, |i, j| dist(i, j) <= 1.0);
    let diameter = (n - 1) as f64 * h / omega;
    let q = if cfg.poly.degree() > 0 { Some(cfg.poly.normalized_at_scale(omega)) } else { None };
    let mut shells = Vec::new();
    let mut k = 0u32;
    while (k as f64).exp2() < diameter {
        let lo = (k as f64).exp2();
        let hi = 2.0 * lo;
        let band = |i: usize, j: usize| {
            let d = dist(i, j);
            d > lo && d <= hi
        };
        let full = SparseMatrix::select(&m, band);
        let half = SparseMatrix::select(&m, |i, j| i > j && band(i, j));
        let ek = match &q {
            Some(q) => ek_of_rescaled(q.rescale(k), c1, 1e-12),
            None => IntervalUnion::empty(),
        };
        let scale = omega * lo;
        let inside: Vec<bool> = (0..n).map(|i| ek.contains(cfg.grid.node(i) / scale)).collect();
        let half_a = half.mask_rows(|i| inside[i]);
        let half_b = half.mask_rows(|i| !inside[i]);
        let nodes_per_shell = (omega * lo / h).floor() as usize;
        shells.push(Shell {
            k,
            full,
            half,
            half_a,
            half_b,
            ek,
            nodes_per_shell,
            coarse: nodes_per_shell < 16,
            truncated: hi > diameter,
        });
        k += 1;
    }
    Ok(Decomposition { omega, s1, shells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    /// Dense SVD below dimension 512, power iteration above.
    Auto,
    PowerIteration,
    DenseSvd,
    /// Golub–Kahan–Lanczos bidiagonalization with full reorthogonalization.
    Lanczos,
}

impl NormMethod {
    pub fn label(&self) -> &'static str {
        match self {
            NormMethod::Auto => "auto",
            NormMethod::PowerIteration => "power_iteration",
            NormMethod::DenseSvd => "dense_svd",
            NormMethod::Lanczos => "lanczos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub method: NormMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { method: NormMethod::Auto, tol: 1e-8, max_iter: 10_000, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Change of the estimate over the last iteration; 0 for dense SVD.
    pub residual: f64,
    pub method: NormMethod,
    pub converged: bool,
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |a, z| a + z.norm_sqr()).sqrt()
}

fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = seeded(seed);
    let mut v: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let s = norm2(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

/// Spectral norm `‖M‖_{ℓ²→ℓ²}`.
pub fn estimate_norm(op: &dyn LinearOperator, opts: NormOptions) -> NormEstimate {
    let dim = op.nrows().max(op.ncols());
    if op.nrows() == 0 || op.ncols() == 0 {
        return NormEstimate { value: 0.0, iterations: 0, residual: 0.0, method: opts.method, converged: true };
    }
    match opts.method {
        NormMethod::Auto if dim < 512 => dense(op),
        NormMethod::Auto | NormMethod::PowerIteration => power(op, opts),
        NormMethod::DenseSvd => dense(op),
        NormMethod::Lanczos => lanczos(op, opts),
    }
}

fn dense(op: &dyn LinearOperator) -> NormEstimate {
    let (r, c) = (op.nrows(), op.ncols());
    let mut m = DMatrix::<Complex64>::zeros(r, c);
    let mut e = vec![ZERO; c];
    let mut col = vec![ZERO; r];
    for j in 0..c {
        e[j] = Complex64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for i in 0..r {
            m[(i, j)] = col[i];
        }
        e[j] = ZERO;
    }
    let value = m.singular_values().max();
    NormEstimate { value, iterations: 0, residual: 0.0, method: NormMethod::DenseSvd, converged: value.is_finite() }
}

fn power(op: &dyn LinearOperator, opts: NormOptions) -> NormEstimate {
    let mut v = random_unit(op.ncols(), opts.seed);
    let mut mv = vec![ZERO; op.nrows()];
    let mut prev = 0.0;
    let mut value = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        op.apply(&v, &mut mv);
        value = norm2(&mv);
        if value == 0.0 {
            return NormEstimate { value, iterations: it, residual: 0.0, method: NormMethod::PowerIteration, converged: true };
        }
        op.apply_adjoint(&mv, &mut v);
        let s = norm2(&v);
        v.iter_mut().for_each(|z| *z /= s);
        residual = (value - prev).abs();
        if residual <= opts.tol * value {
            return NormEstimate { value, iterations: it, residual, method: NormMethod::PowerIteration, converged: true };
        }
        prev = value;
    }
    NormEstimate { value, iterations: opts.max_iter, residual, method: NormMethod::PowerIteration, converged: false }
}

fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let mut dot = ZERO;
            for (x, y) in b.iter().zip(w.iter()) {
                dot += x.conj() * y;
            }
            for (x, y) in w.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
    }
}

fn top_singular(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut b = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        b[(i, i)] = alphas[i];
        if i + 1 < k {
            b[(i, i + 1)] = betas[i];
        }
    }
    let svd = b.svd(false, true);
    let (mut best, mut idx) = (0.0, 0);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > best {
            best = *s;
            idx = i;
        }
    }
    let vt = svd.v_t.expect("requested right singular vectors");
    (best, (0..k).map(|j| vt[(idx, j)]).collect())
}

/// The returned value is `‖Mv‖/‖v‖` for the Ritz vector `v`, so it is a
/// certified lower bound.
fn lanczos(op: &dyn LinearOperator, opts: NormOptions) -> NormEstimate {
    let (r, c) = (op.nrows(), op.ncols());
    let steps = opts.max_iter.min(r.min(c)).max(1);
    let mut vs: Vec<Vec<Complex64>> = vec![random_unit(c, opts.seed)];
    let mut us: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut prev = 0.0;
    let mut residual = f64::INFINITY;
    let mut calm = 0;
    let mut converged = false;
    let mut best_w: Vec<f64> = vec![1.0];
    let mut p = vec![ZERO; r];
    let mut w = vec![ZERO; c];
    for j in 0..steps {
        op.apply(&vs[j], &mut p);
        if let Some(u) = us.last() {
            let b = betas[j - 1];
            p.iter_mut().zip(u).for_each(|(x, y)| *x -= y * b);
        }
        orthogonalize(&mut p, &us);
        let alpha = norm2(&p);
        alphas.push(alpha);
        if alpha > 0.0 {
            p.iter_mut().for_each(|z| *z /= alpha);
        }
        us.push(p.clone());
        let (sigma, wv) = top_singular(&alphas, &betas[..alphas.len() - 1]);
        best_w = wv;
        residual = (sigma - prev).abs();
        prev = sigma;
        if residual <= opts.tol * sigma {
            calm += 1;
        } else {
            calm = 0;
        }
        if calm >= 2 || alpha == 0.0 {
            converged = true;
            break;
        }
        op.apply_adjoint(&us[j], &mut w);
        let a = alphas[j];
        w.iter_mut().zip(&vs[j]).for_each(|(x, y)| *x -= y * a);
        orthogonalize(&mut w, &vs);
        let beta = norm2(&w);
        if beta <= 1e-14 * sigma.max(1e-300) {
            converged = true;
            break;
        }
        betas.push(beta);
        vs.push(w.iter().map(|z| z / beta).collect());
    }
    if alphas.len() == steps.min(r.min(c)) {
        converged = true;
    }
    let mut v = vec![ZERO; c];
    for (coef, basis) in best_w.iter().zip(&vs) {
        v.iter_mut().zip(basis).for_each(|(x, y)| *x += y * *coef);
    }
    let mut mv = vec![ZERO; r];
    op.apply(&v, &mut mv);
    let value = norm2(&mv) / norm2(&v);
    NormEstimate { value, iterations: alphas.len(), residual, method: NormMethod::Lanczos, converged }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub coeff_id: usize,
    pub coeffs: Vec<f64>,
    pub u: f64,
    pub norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
    /// max/min over converged cells.
    pub ratio: f64,
    pub excluded: usize,
}

/// Coefficients `c_0..c_n`, each log-uniform in magnitude over `[1e-3, 1e3]`
/// with a random sign.
pub fn random_coefficients<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..=n).map(|_| signed_log_uniform(rng, 1e-3, 1e3)).collect()
}

/// The seeded coefficient ensemble used by [`sweep_uniformity`].
pub fn coefficient_ensemble(n: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed ^ ((n as u64) << 32));
    (0..samples).map(|_| random_coefficients(&mut rng, n)).collect()
}

/// Summary ratio of a list of cells.
pub fn summarize(cells: Vec<SweepCell>) -> SweepTable {
    let good: Vec<f64> = cells.iter().filter(|c| c.converged && c.norm > 0.0).map(|c| c.norm).collect();
    let excluded = cells.len() - good.len();
    let max = good.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = good.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if good.is_empty() { f64::NAN } else { max / min };
    SweepTable { cells, ratio, excluded }
}

/// `‖S_u‖` for one coefficient vector.
pub fn norm_cell(
    curve: &Curve,
    coeffs: &[f64],
    u: f64,
    grid: Grid1d,
    opts: NormOptions,
) -> Result<NormEstimate> {
    let poly = Polynomial::new(coeffs.to_vec())?;
    let cfg = SuConfig::new(poly, u, curve.clone(), grid);
    let m = discretize_su(&cfg)?;
    Ok(estimate_norm(&m, opts))
}

/// `‖S_u‖` over a seeded ensemble of degree-`n` polynomials and the given
/// `u`; unconverged estimates are excluded from the ratio and counted.
pub fn sweep_uniformity(
    curve: &Curve,
    n: usize,
    coeff_samples: usize,
    u_values: &[f64],
    grid: Grid1d,
    opts: NormOptions,
) -> Result<SweepTable> {
    let ensemble = coefficient_ensemble(n, coeff_samples, opts.seed);
    let mut cells = Vec::new();
    for (id, coeffs) in ensemble.iter().enumerate() {
        for &u in u_values {
            let est = norm_cell(curve, coeffs, u, grid, opts)?;
            cells.push(SweepCell { n, coeff_id: id, coeffs: coeffs.clone(), u, norm: est.value, converged: est.converged });
        }
    }
    Ok(summarize(cells))
}

/// Tensor grid for 2D fields: `x1 ∈ [−a1, a1)`, `x2 ∈ [−a2, a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2d {
    pub n1: usize,
    pub n2: usize,
    pub a1: f64,
    pub a2: f64,
}

impl Default for Grid2d {
    fn default() -> Self {
        Grid2d { n1: 256, n2: 256, a1: 2.0, a2: 64.0 }
    }
}

impl Grid2d {
    pub fn h1(&self) -> f64 {
        2.0 * self.a1 / self.n1 as f64
    }
    pub fn h2(&self) -> f64 {
        2.0 * self.a2 / self.n2 as f64
    }
    pub fn x1(&self, i: usize) -> f64 {
        -self.a1 + i as f64 * self.h1()
    }
    pub fn x2(&self, j: usize) -> f64 {
        -self.a2 + j as f64 * self.h2()
    }
    pub fn grid1(&self) -> Grid1d {
        Grid1d { extent: self.a1, step: self.h1() }
    }
}

/// Real samples on a [`Grid2d`], row-major in `(x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2d {
    pub n1: usize,
    pub n2: usize,
    pub data: Vec<f64>,
}

impl Field2d {
    pub fn zeros(n1: usize, n2: usize) -> Self {
        Field2d { n1, n2, data: vec![0.0; n1 * n2] }
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(g: &Grid2d, mut f: F) -> Self {
        let mut out = Field2d::zeros(g.n1, g.n2);
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                out.data[i * g.n2 + j] = f(g.x1(i), g.x2(j));
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n2 + j]
    }

    /// Discrete L² norm with cell area `h1·h2`.
    pub fn l2(&self, g: &Grid2d) -> f64 {
        (self.data.iter().fold(0.0, |a, v| a + v * v) * g.h1() * g.h2()).sqrt()
    }
}

/// A sum of axis-aligned Gaussian bumps.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    /// `(weight, c1, c2, s1, s2)`.
    pub bumps: Vec<(f64, f64, f64, f64, f64)>,
}

impl GaussianMixture {
    pub fn centered() -> Self {
        GaussianMixture { bumps: vec![(1.0, 0.0, 0.0, 0.25, 4.0)] }
    }

    /// One to three bumps near the origin, well inside the default frame.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let count = rng.gen_range(1..=3);
        let bumps = (0..count)
            .map(|_| {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (
                    sign * rng.gen_range(0.5..1.5),
                    rng.gen_range(-0.4..0.4),
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(0.15..0.3),
                    rng.gen_range(2.0..5.0),
                )
            })
            .collect();
        GaussianMixture { bumps }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.bumps.iter().fold(0.0, |acc, &(w, c1, c2, s1, s2)| {
            let a = (x1 - c1) / s1;
            let b = (x2 - c2) / s2;
            acc + w * (-0.5 * (a * a + b * b)).exp()
        })
    }

    pub fn sample(&self, g: &Grid2d) -> Field2d {
        Field2d::from_fn(g, |a, b| self.eval(a, b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct H2dOutput {
    pub field: Field2d,
    /// Relative L² mass of `f` in the band `|x2| > a2 − max shift`, which the
    /// curved shifts can carry out of the frame.
    pub tail_mass: f64,
}

fn check_field(f: &Field2d, g: &Grid2d) -> Result<()> {
    if f.n1 != g.n1 || f.n2 != g.n2 || f.data.len() != g.n1 * g.n2 {
        return Err(invalid("field shape does not match the grid"));
    }
    if g.n1 < 2 || g.n2 < 2 {
        return Err(invalid("2D grid needs at least 2 nodes per axis"));
    }
    Ok(())
}

/// `H f(x1, x2) = p.v.∫ f(x1−t, x2 − P(x1)γ(t)) dt/t` with `t` on the `x1`
/// grid, symmetric pairing of `±t` and linear interpolation in `x2` (the
/// `x1` argument always lands on a node). Reads outside the frame are 0.
pub fn apply_h2d(f: &Field2d, p: &Polynomial, curve: &Curve, g: &Grid2d) -> Result<H2dOutput> {
    check_field(f, g)?;
    let (n1, n2) = (g.n1, g.n2);
    let h2 = g.h2();
    let gammas = offset_gammas(curve, n1, g.h1())?;
    let mut out = Field2d::zeros(n1, n2);
    let mut max_shift: f64 = 0.0;
    for i in 0..n1 {
        let px = p.eval(g.x1(i));
        let row = &mut out.data[i * n2..(i + 1) * n2];
        for src in 0..n1 {
            let m = i as i64 - src as i64;
            if m == 0 {
                continue;
            }
            let shift = px * gammas[(n1 as i64 - 1 + m) as usize];
            if !shift.is_finite() {
                return Err(Error::Range { t: shift });
            }
            max_shift = max_shift.max(shift.abs());
            let w = 1.0 / m as f64;
            let frow = &f.data[src * n2..(src + 1) * n2];
            let s = shift / h2;
            let base = s.floor();
            let frac = s - base;
            let b = base as i64;
            for (j, o) in row.iter_mut().enumerate() {
                let q = j as i64 - b;
                // x2_j − shift sits between nodes q−1 and q with weight frac on q−1.
                let hi = if (0..n2 as i64).contains(&q) { frow[q as usize] } else { 0.0 };
                let lo = if (0..n2 as i64).contains(&(q - 1)) { frow[(q - 1) as usize] } else { 0.0 };
                *o += w * ((1.0 - frac) * hi + frac * lo);
            }
        }
    }
    let edge = g.a2 - max_shift;
    let mut tail = 0.0;
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let v = f.get(i, j);
            total += v * v;
            if g.x2(j).abs() > edge {
                tail += v * v;
            }
        }
    }
    let tail_mass = if total > 0.0 { (tail / total).sqrt() } else { 0.0 };
    Ok(H2dOutput { field: out, tail_mass })
}

/// Discrete Fourier transform of each row, `F[l] = Σ_j f[j] e^{−2πi jl/N}`.
fn dft_rows(f: &Field2d) -> Vec<Vec<Complex64>> {
    let n = f.n2;
    let twiddle: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)).collect();
    (0..f.n1)
        .map(|i| {
            let row = &f.data[i * n..(i + 1) * n];
            (0..n)
                .map(|l| {
                    let mut acc = ZERO;
                    for (j, v) in row.iter().enumerate() {
                        acc += twiddle[(j * l) % n] * *v;
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `(‖H f‖, (h1h2/N2 · Σ_l ‖S_{u_l} f̂_l‖²)^{1/2})` with `u_l = 2πl/(N2h2)`
/// over signed frequencies `l`.
pub fn plancherel_crosscheck(f: &Field2d, p: &Polynomial, curve: &Curve, g: &Grid2d) -> Result<(f64, f64)> {
    check_field(f, g)?;
    let direct = apply_h2d(f, p, curve, g)?.field.l2(g);
    let (n1, n2) = (g.n1, g.n2);
    let spectrum = dft_rows(f);
    let h1 = g.h1();
    let gammas = offset_gammas(curve, n1, h1)?;
    let pvals: Vec<f64> = (0..n1).map(|i| p.eval(g.x1(i))).collect();
    let mut total = 0.0;
    let mut slice = vec![ZERO; n1];
    let mut image = vec![ZERO; n1];
    for l in 0..n2 {
        let signed = if l <= n2 / 2 { l as f64 } else { l as f64 - n2 as f64 };
        let u = 2.0 * PI * signed / (n2 as f64 * g.h2());
        for i in 0..n1 {
            slice[i] = spectrum[i][l];
        }
        if slice.iter().all(|z| *z == ZERO) {
            continue;
        }
        let rows: Vec<f64> = pvals.iter().map(|v| u * v).collect();
        let m = build_su(n1, h1, h1 / 2.0, &gammas, &rows)?;
        m.apply(&slice, &mut image);
        total += image.iter().fold(0.0, |a, z| a + z.norm_sqr());
    }
    let sliced = (total * h1 * g.h2() / n2 as f64).sqrt();
    Ok((direct, sliced))
}
