use flathilbert::curves::{check_theorem_conditions, log_grid, Curve};
use flathilbert::intervals::IntervalUnion;
use flathilbert::kernels::compute_kernel;
use flathilbert::oscquad::{
    compute_jr, oscillatory_integral, solve_omega, upsilon, verify_jr_envelope, JrCase, OscOptions, PhaseSpec, SweepEntry,
};
use flathilbert::poly::Polynomial;
use flathilbert::Complex64;
use proptest::prelude::*;

/// Midpoint sum of `amp(z)·e^{i·phase(z)}` on `[a, b]` with step about `h`.
fn riemann<P: Fn(f64) -> f64, A: Fn(f64) -> f64>(phase: P, amp: A, a: f64, b: f64, h: f64) -> Complex64 {
    let n = ((b - a) / h).round() as usize;
    let h = (b - a) / n as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    let (mut cre, mut cim) = (0.0, 0.0);
    for i in 0..n {
        let z = a + (i as f64 + 0.5) * h;
        let (s, c) = phase(z).sin_cos();
        let w = amp(z);
        for (acc, comp, v) in [(&mut re, &mut cre, w * c), (&mut im, &mut cim, w * s)] {
            let y = v - *comp;
            let t = *acc + y;
            *comp = (t - *acc) - y;
            *acc = t;
        }
    }
    Complex64::new(re * h, im * h)
}

#[test]
fn constant_phase_returns_the_measure() {
    let d = IntervalUnion::new(vec![(0.0, 1.0), (2.0, 3.0)]);
    let r = oscillatory_integral(|_| 0.0, &d, 1e-9);
    assert!(r.converged);
    assert!((r.value - Complex64::new(2.0, 0.0)).norm() < 1e-14);
}

#[test]
fn linear_phase_closed_form() {
    let r = oscillatory_integral(|z| 10.0 * z, &IntervalUnion::interval(0.0, 1.0), 1e-10);
    let exact = (Complex64::new(0.0, 10.0).exp() - 1.0) / Complex64::new(0.0, 10.0);
    assert!((r.value - exact).norm() < 1e-12);
    assert!((r.value.norm() - 2.0 * 5f64.sin().abs() / 10.0).abs() < 1e-12);
}

#[test]
fn quadratic_phase_matches_riemann_sum() {
    let r = oscillatory_integral(|z| z * z, &IntervalUnion::interval(0.0, 1.0), 1e-10);
    let oracle = riemann(|z| z * z, |_| 1.0, 0.0, 1.0, 1e-6);
    assert!((r.value - oracle).norm() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adaptive_engine_matches_riemann_oracle(
        a1 in -30.0f64..30.0,
        a2 in -30.0f64..30.0,
        a3 in -5.0f64..5.0,
        b in 0.5f64..20.0,
    ) {
        let phase = move |z: f64| a1 * z + a2 * z * z + a3 * (b * z).sin();
        let tol = 1e-10;
        let r = oscillatory_integral(phase, &IntervalUnion::interval(0.0, 1.0), tol);
        prop_assert!(r.converged);
        let oracle = riemann(phase, |_| 1.0, 0.0, 1.0, 1e-6);
        prop_assert!((r.value - oracle).norm() <= 1e-8f64.max(10.0 * tol));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn value_is_bounded_by_the_measure(
        pieces in prop::collection::vec((-5.0f64..5.0, 0.0f64..2.0), 1..4),
        c in prop::collection::vec(-40.0f64..40.0, 1..5),
    ) {
        let d = IntervalUnion::new(pieces.iter().map(|&(a, w)| (a, a + w)).collect());
        let phase = |z: f64| c.iter().rev().fold(0.0, |acc, v| acc * z + v);
        let r = oscillatory_integral(phase, &d, 1e-9);
        prop_assert!(r.value.norm() <= d.measure() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn omega_solves_the_normalization(
        u in -1e4f64..1e4,
        s in 0.01f64..100.0,
        n in 1usize..6,
        idx in 0usize..9,
    ) {
        prop_assume!(u.abs() > 1e-6);
        let curve = Curve::corpus()[idx].clone();
        let w = solve_omega(u, s, n, &curve).unwrap();
        let lhs = (u * s).abs() * w.powi(n as i32) * curve.eval(w, 0).unwrap();
        prop_assert!((lhs - 1.0).abs() <= 1e-10, "{} ω={w} → {lhs}", curve.name);
    }
}

#[test]
fn omega_closed_forms() {
    let t2 = Curve::power(2.0);
    assert!((solve_omega(1.0, 1.0, 2, &t2).unwrap() - 1.0).abs() < 1e-12);
    assert!((solve_omega(16.0, 1.0, 2, &t2).unwrap() - 0.5).abs() < 1e-12);
    assert!((solve_omega(1.0, 1.0, 1, &t2).unwrap() - 1.0).abs() < 1e-12);
    assert!(solve_omega(0.0, 1.0, 2, &t2).is_err());
}

#[test]
fn upsilon_of_the_parabola_is_the_mean() {
    let spec = PhaseSpec::new(Curve::power(2.0), 3.7, 5, Polynomial::monomial(2), -1.0, 0.0).unwrap();
    assert!((upsilon(&spec, 1.0).unwrap() - 1.5).abs() < 1e-10);
    let spec = PhaseSpec::new(Curve::power(2.0), 1.0, 0, Polynomial::monomial(2), -1e-6, 0.0).unwrap();
    assert!((upsilon(&spec, 1.0).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn upsilon_is_monotone_and_bounded_on_a_sweep() {
    // C1 over every argument s·w the sweep can reach, s = ω2^k ≤ 1e3·2^20, w ∈ [0, 2].
    let grid = log_grid(1e-4, 1e10, 4000);
    let mut rng = flathilbert::rng::seeded(7);
    use rand::Rng;
    for curve in Curve::example_set() {
        let c1 = check_theorem_conditions(&curve, &grid).unwrap().c1;
        for _ in 0..15 {
            let omega = 10f64.powf(rng.gen_range(-3.0..3.0));
            let k = rng.gen_range(0..=20);
            let x = rng.gen_range(-1.0..1.0);
            let y = x + rng.gen_range(1e-3..1.0);
            let spec = PhaseSpec::new(curve.clone(), omega, k, Polynomial::monomial(2), x, y).unwrap();
            let (lo, hi) = (y + 1.0, x + 2.0);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=32 {
                let z = lo + (hi - lo) * i as f64 / 32.0;
                let v = upsilon(&spec, z).unwrap();
                assert!(v >= prev * (1.0 - 1e-9), "{}: Υ decreased at z={z}", curve.name);
                assert!(v <= 2.0 / c1 * (1.0 + 1e-9), "{}: Υ={v} above 2/C1", curve.name);
                prev = v;
            }
        }
    }
}

#[test]
fn jr_matches_closed_form_phase() {
    let spec = PhaseSpec::new(Curve::power(2.0), 1.0, 0, Polynomial::monomial(1), -1.0, -0.5).unwrap();
    let r = compute_jr(&spec, 0.95, &IntervalUnion::empty(), OscOptions { tol: 1e-11, ..Default::default() }).unwrap();
    // ((z+1)² − (z+0.5)²)·z
    let oracle = riemann(|z| (z + 0.75) * z, |_| 1.0, 0.5, 0.95, 1e-6);
    assert!(r.converged);
    assert!((r.value - oracle).norm() < 1e-8, "{} vs {}", r.value, oracle);

    let empty = compute_jr(&spec, 0.5, &IntervalUnion::empty(), OscOptions::default()).unwrap();
    assert_eq!(empty.value, Complex64::new(0.0, 0.0));
    assert!(compute_jr(&spec, 1.2, &IntervalUnion::empty(), OscOptions::default()).is_err());
}

#[test]
fn trivial_entries_never_set_the_constant() {
    let p = Polynomial::new(vec![2.0, 2.0, 1.0]).unwrap();
    let sweep: Vec<SweepEntry> = (0..4)
        .flat_map(|k| {
            [SweepEntry { k, x: 0.0, y: 0.5, r: 1.5 }, SweepEntry { k, x: 0.0, y: 0.25, r: 1.6 }]
        })
        .collect();
    let rep = verify_jr_envelope(&Curve::power(2.0), &p, 1.0, 1.0, &sweep, OscOptions::default()).unwrap();
    assert!(rep.rows.iter().filter(|r| r.entry.r == 1.5).all(|r| r.case == JrCase::Empty && r.jr_abs == 0.0));
    let max_of = |case| {
        rep.rows.iter().filter(|r| r.case == case && r.converged).map(|r| r.normalized).reduce(f64::max)
    };
    assert_eq!(rep.c_case1, max_of(JrCase::Ratio));
    assert_eq!(rep.c_case2, max_of(JrCase::Slope));
    assert!(rep.c_case1.or(rep.c_case2).unwrap() > 0.0);
}

#[test]
fn kernel_sample_matches_riemann_sum() {
    let p = Polynomial::monomial(1);
    let s = compute_kernel(&p, &Curve::power(2.0), 1.0, 0, 0.0, 0.5, 1.0, 1e-11).unwrap();
    // φ(z) = z² − (z − 0.5)² = z − 0.25
    let oracle = riemann(|z| (z - 0.25) * z, |z| 1.0 / (z * (z - 0.5)), 1.5, 2.0, 1e-6);
    assert!(s.converged());
    assert!((s.value - oracle).norm() < 1e-7);
}
