use flathilbert::curves::Curve;
use flathilbert::opnorm::{
    apply_h2d, decompose_su, discretize_su, estimate_norm, plancherel_crosscheck, sweep_uniformity, CMatrix,
    Field2d, GaussianMixture, Grid1d, Grid2d, LinearOperator, NormMethod, NormOptions, SuConfig,
};
use flathilbert::poly::Polynomial;
use flathilbert::rng::seeded;
use flathilbert::Complex64;
use nalgebra::DMatrix;
use rand::Rng;
use rustfft::FftPlanner;

fn poly(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec()).unwrap()
}

fn cfg(p: Polynomial, u: f64, extent: f64, step: f64) -> SuConfig {
    SuConfig::new(p, u, Curve::power(2.0), Grid1d::new(extent, step).unwrap())
}

fn oracle_norm(m: &CMatrix, rows: usize, cols: usize) -> f64 {
    let d = DMatrix::from_fn(rows, cols, |i, j| m.get(i, j));
    d.singular_values().max()
}

fn dense_of(op: &dyn LinearOperator) -> CMatrix {
    let (r, c) = (op.nrows(), op.ncols());
    let mut out = CMatrix::zeros(r, c);
    let mut e = vec![Complex64::new(0.0, 0.0); c];
    let mut col = vec![Complex64::new(0.0, 0.0); r];
    for j in 0..c {
        e[j] = Complex64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for i in 0..r {
            out.set(i, j, col[i]);
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    out
}

#[test]
fn decomposition_reassembles_the_matrix() {
    let c = cfg(poly(&[-1.0, 0.3, 1.0]), 2.0, 4.0, 0.125);
    let m = discretize_su(&c).unwrap();
    let d = decompose_su(&c, 0.37, 1.0).unwrap();
    let n = c.grid.len();
    let mut sum = dense_of(&d.s1);
    for s in &d.shells {
        let f = dense_of(&s.full);
        let h = dense_of(&s.half);
        let (a, b) = (dense_of(&s.half_a), dense_of(&s.half_b));
        for i in 0..n {
            for j in 0..n {
                let v = sum.get(i, j) + f.get(i, j);
                sum.set(i, j, v);
                assert_eq!(a.get(i, j) + b.get(i, j), h.get(i, j));
                assert_eq!(h.get(i, j), if i > j { f.get(i, j) } else { Complex64::new(0.0, 0.0) });
            }
        }
    }
    assert_eq!(sum, m);
    assert!(d.shells.last().unwrap().truncated);
}

#[test]
fn pure_powers_have_empty_exceptional_rows() {
    for n in 1..=4 {
        let c = cfg(Polynomial::monomial(n), 1.0, 4.0, 0.125);
        let d = decompose_su(&c, 0.5, 1.0).unwrap();
        assert!(d.shells.iter().all(|s| s.half_a.nnz() == 0 && s.half_b == s.half));
    }
}

#[test]
fn masking_never_increases_the_norm_and_respects_the_measure_bound() {
    // E_k of x²+1 after normalization sits at x ∈ ±[0.127, 1.069] for every k.
    let c = cfg(poly(&[1.0, 0.0, 1.0]), 1.0, 8.0, 1.0 / 16.0);
    let omega = 1.0;
    let d = decompose_su(&c, omega, 1.0).unwrap();
    let h = c.grid.step;
    let mut nonempty = 0;
    for s in &d.shells {
        let opts = NormOptions { method: NormMethod::DenseSvd, ..Default::default() };
        let full = estimate_norm(&s.half, opts).value;
        let a = estimate_norm(&s.half_a, opts).value;
        let b = estimate_norm(&s.half_b, opts).value;
        assert!(a <= full * (1.0 + 1e-12) && b <= full * (1.0 + 1e-12));
        let width = omega * (s.k as f64).exp2();
        let rows = s.half_a.occupied_rows() as f64;
        let bound = (rows * h / width * (1.0 + h / width)).sqrt();
        assert!(a <= bound * (1.0 + 1e-12), "k={} {a} > {bound}", s.k);
        let measure = s.ek.measure() * width;
        assert!(rows <= measure / h + 2.0 * s.ek.len() as f64);
        if rows > 0.0 {
            nonempty += 1;
        }
    }
    assert!(nonempty >= 3);
}

#[test]
fn norm_methods_agree_with_dense_svd() {
    let mut rng = seeded(17);
    for _ in 0..3 {
        let m = CMatrix::from_fn(50, 50, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let oracle = oracle_norm(&m, 50, 50);
        for method in [NormMethod::DenseSvd, NormMethod::PowerIteration, NormMethod::Lanczos] {
            let est = estimate_norm(&m, NormOptions { method, tol: 1e-12, max_iter: 50_000, ..Default::default() });
            assert!(((est.value - oracle) / oracle).abs() <= 1e-7, "{}: {} vs {oracle}", method.label(), est.value);
            assert!(est.value <= oracle * (1.0 + 1e-12));
        }
    }
    let id = CMatrix::identity(30);
    assert!((estimate_norm(&id, NormOptions::default()).value - 1.0).abs() < 1e-12);
    let a: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
    let b: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).cos() + 0.1).collect();
    let r1 = CMatrix::from_fn(20, 20, |i, j| Complex64::new(a[i] * b[j], 0.0));
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((estimate_norm(&r1, NormOptions::default()).value - na * nb).abs() < 1e-10);
}

#[test]
fn constant_polynomial_gives_a_convolution() {
    let (extent, step) = (8.0, 1.0 / 16.0);
    for (c0, u) in [(1.0, 0.0), (1.0, 0.3), (-2.0, 1.7)] {
        let c = cfg(poly(&[c0]), u, extent, step);
        let m = discretize_su(&c).unwrap();
        let n = c.grid.len();
        // Circulant embedding of the kernel row k(o) = e^{−iucγ(oh)}/o.
        let len = 16 * n;
        let lam = c.u * c0;
        let kernel = |o: i64| {
            if o == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let t = o as f64 * step;
                Complex64::from_polar(1.0 / o as f64, -lam * t * t)
            }
        };
        let mut sym: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
        for o in -(n as i64 - 1)..(n as i64) {
            sym[o.rem_euclid(len as i64) as usize] = kernel(o);
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(len).process(&mut sym);
        let sup = sym.iter().map(|z| z.norm()).fold(0.0, f64::max);

        let mut rng = seeded(1);
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let mut dense = vec![Complex64::new(0.0, 0.0); n];
        m.apply(&v, &mut dense);
        let mut a: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
        let mut b = a.clone();
        for o in -(n as i64 - 1)..(n as i64) {
            a[o.rem_euclid(len as i64) as usize] = kernel(o);
        }
        b[..n].copy_from_slice(&v);
        planner.plan_fft_forward(len).process(&mut a);
        planner.plan_fft_forward(len).process(&mut b);
        let mut prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        planner.plan_fft_inverse(len).process(&mut prod);
        for i in 0..n {
            assert!((prod[i] / len as f64 - dense[i]).norm() < 1e-10);
        }
        let norm = estimate_norm(&m, NormOptions { method: NormMethod::Lanczos, ..Default::default() }).value;
        assert!(norm <= sup * (1.0 + 1e-6), "{norm} > symbol sup {sup}");
    }
}

#[test]
fn zero_frequency_is_the_discrete_hilbert_matrix() {
    let c = cfg(poly(&[0.4, -1.0, 2.0]), 0.0, 16.0, 1.0 / 32.0);
    let m = discretize_su(&c).unwrap();
    let n = c.grid.len();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(m.get(i, j), -m.get(j, i));
        }
    }
    let est = estimate_norm(&m, NormOptions { method: NormMethod::Lanczos, ..Default::default() });
    assert!((est.value / std::f64::consts::PI - 1.0).abs() < 0.05, "{}", est.value);
}

#[test]
fn constant_polynomial_norm_is_scale_invariant() {
    let grid = Grid1d::new(16.0, 1.0 / 32.0).unwrap();
    let opts = NormOptions { method: NormMethod::Lanczos, ..Default::default() };
    let norms: Vec<f64> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&lam| {
            let c = SuConfig::new(poly(&[lam]), 1.0, Curve::power(2.0), grid);
            estimate_norm(&discretize_su(&c).unwrap(), opts).value
        })
        .collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 1.05, "{norms:?}");
}

#[test]
fn small_uniformity_sweep() {
    let grid = Grid1d::new(4.0, 1.0 / 32.0).unwrap();
    let opts = NormOptions { method: NormMethod::Lanczos, ..Default::default() };
    for n in 1..=2 {
        let t = sweep_uniformity(&Curve::power(2.0), n, 3, &[1e-3, 1e-1, 10.0, 1e3], grid, opts).unwrap();
        assert_eq!(t.cells.len(), 12);
        assert_eq!(t.excluded, 0);
        assert!(t.ratio <= 10.0, "n={n} ratio {}", t.ratio);
    }
}

#[test]
fn zero_polynomial_is_the_rowwise_hilbert_transform() {
    let g = Grid2d { n1: 64, n2: 32, a1: 2.0, a2: 8.0 };
    let f = GaussianMixture::random(&mut seeded(4)).sample(&g);
    let out = apply_h2d(&f, &Polynomial::zero(), &Curve::power(2.0), &g).unwrap();
    for i in 0..g.n1 {
        for j in 0..g.n2 {
            let mut acc = 0.0;
            for src in 0..g.n1 {
                if src != i {
                    acc += f.get(src, j) / (i as f64 - src as f64);
                }
            }
            assert!((out.field.get(i, j) - acc).abs() < 1e-12);
        }
    }
    let zero = Field2d::zeros(g.n1, g.n2);
    assert!(apply_h2d(&zero, &poly(&[0.0, 1.0]), &Curve::power(2.0), &g).unwrap().field.l2(&g) == 0.0);
    assert_eq!(plancherel_crosscheck(&zero, &poly(&[0.0, 1.0]), &Curve::power(2.0), &g).unwrap(), (0.0, 0.0));
}

#[test]
fn plancherel_routes_agree() {
    let g = Grid2d::default();
    let t2 = Curve::power(2.0);
    let f = GaussianMixture::centered().sample(&g);
    let (direct, sliced) = plancherel_crosscheck(&f, &Polynomial::zero(), &t2, &g).unwrap();
    assert!((direct - sliced).abs() <= 1e-6 * direct, "{direct} vs {sliced}");
    let (direct, sliced) = plancherel_crosscheck(&f, &poly(&[0.0, 1.0]), &t2, &g).unwrap();
    assert!((direct / sliced - 1.0).abs() <= 0.02, "{direct} vs {sliced}");
    let ratio = direct / f.l2(&g);
    assert!(ratio > 0.5 && ratio < std::f64::consts::PI * 1.5);
}
