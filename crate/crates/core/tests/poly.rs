use flathilbert::poly::{
    compute_ek, rescale, sum_ek_alpha, tv_sign_change_check, verify_gradient_bound, EkTest, Polynomial,
    POLE_EXCLUSION,
};
use flathilbert::rng::{seeded, signed_log_uniform};
use proptest::prelude::*;
use rand::Rng;

fn poly(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec()).unwrap()
}

fn random_monic(seed: u64, n: usize) -> Polynomial {
    let mut rng = seeded(seed);
    let mut c: Vec<f64> = (0..n).map(|_| signed_log_uniform(&mut rng, 1e-2, 1e1)).collect();
    c.push(1.0);
    poly(&c)
}

#[test]
fn rescale_examples() {
    assert_eq!(rescale(&poly(&[0.0, 1.0, 1.0]), 1).coeffs(), &[0.0, 0.5, 1.0]);
    let p = poly(&[2.0, -1.0, 0.5, 1.0]);
    assert_eq!(rescale(&p, 0), p);
    assert_eq!(rescale(&Polynomial::monomial(3), 5), Polynomial::monomial(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescale_is_a_semigroup(
        c in prop::collection::vec(-10.0f64..10.0, 1..6),
        k1 in 0u32..12,
        k2 in 0u32..12,
    ) {
        let mut c = c;
        c.push(1.0);
        let p = poly(&c);
        let a = rescale(&rescale(&p, k1), k2);
        let b = rescale(&p, k1 + k2);
        prop_assert!(a.is_monic() && a.degree() == p.degree());
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn roots_reconstruct_the_polynomial(
        real in prop::collection::vec(-3.0f64..3.0, 0..4),
        cx in prop::collection::vec((-2.0f64..2.0, 0.1f64..2.0), 0..2),
    ) {
        prop_assume!(!real.is_empty() || !cx.is_empty());
        let p = Polynomial::from_roots(&real, &cx);
        let r = p.roots();
        prop_assert_eq!(r.real_roots.len() + 2 * r.complex_roots.len(), p.degree());
        let q = Polynomial::from_roots(&r.real_roots, &r.complex_roots);
        for (x, y) in p.coeffs().iter().zip(q.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-7 * (1.0 + y.abs()), "{:?} vs {:?}", p, q);
        }
    }

    #[test]
    fn gradient_constant_is_positive(seed in 0u64..1000, n in 1usize..6, delta in 0.01f64..1.0) {
        let p = random_monic(seed, n);
        prop_assert!(verify_gradient_bound(&p, delta, 4000).unwrap() > 0.0);
    }

    #[test]
    fn ek_avoids_poles_of_the_ratio(seed in 0u64..1000, n in 2usize..6, k in 0u32..6) {
        let p = random_monic(seed, n);
        let q = p.rescale(k);
        let t = EkTest::new(q.clone(), 1.0);
        let ek = compute_ek(&p, k, 1.0, 1e-9).unwrap();
        for r in q.derivative().roots().real_roots {
            for f in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let x = r + f * POLE_EXCLUSION * 0.99;
                prop_assert!(!t.contains(x));
            }
            if ek.contains(r) {
                prop_assert!(t.ratio(r) <= 4.0);
            }
        }
    }
}

#[test]
fn ek_is_empty_for_pure_powers_and_linear_polynomials() {
    for n in 1..=6 {
        for k in [0, 3, 10, 20] {
            assert!(compute_ek(&Polynomial::monomial(n), k, 1.0, 1e-9).unwrap().is_empty());
        }
    }
    for c in [-5.0, -0.3, 0.0, 0.1, 7.0] {
        for k in [0, 4, 20] {
            assert!(compute_ek(&poly(&[c, 1.0]), k, 1.0, 1e-9).unwrap().is_empty());
        }
    }
    assert!(compute_ek(&poly(&[2.0]), 0, 1.0, 1e-9).is_err());
}

#[test]
fn ek_of_x2_plus_1_matches_dense_sampling() {
    // P/P' = (x²+1)/(2x), (P/P')' = (x²−1)/(2x²)
    let inside = |x: f64| x != 0.0 && ((x * x + 1.0) / (2.0 * x)).abs() <= 4.0 && (x * x - 1.0) / (2.0 * x * x) <= 1.0 / 16.0;
    let step = 1e-5;
    let mut count = 0usize;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 1..=300_000 {
        let x = i as f64 * step;
        if inside(x) {
            count += 1;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let oracle = 2.0 * count as f64 * step;
    let ek = compute_ek(&poly(&[1.0, 0.0, 1.0]), 0, 1.0, 1e-9).unwrap();
    assert_eq!(ek.len(), 2);
    let (a, b) = ek.intervals()[1];
    assert!((a - lo).abs() <= 2.0 * step && (b - hi).abs() <= 2.0 * step, "[{a}, {b}] vs [{lo}, {hi}]");
    assert!((ek.measure() - oracle).abs() <= 4.0 * step);
    assert_eq!(ek.intervals()[0], (-b, -a));
    assert!((a - (4.0 - 15f64.sqrt())).abs() < 1e-8);
    assert!((b - (8.0f64 / 7.0).sqrt()).abs() < 1e-8);
}

#[test]
fn ek_sums() {
    let s = sum_ek_alpha(&Polynomial::monomial(4), 0.5, 10, 1.0, 1e-9).unwrap();
    assert_eq!(s.partial_sum, 0.0);

    let s = sum_ek_alpha(&poly(&[1.0, 0.0, 1.0]), 0.5, 0, 1.0, 1e-9).unwrap();
    let closed = (2.0 * ((8.0f64 / 7.0).sqrt() - (4.0 - 15f64.sqrt()))).sqrt();
    assert!((s.partial_sum - closed).abs() < 1e-8);
    assert!((s.partial_sum - 1.373).abs() < 1e-3);

    let s = sum_ek_alpha(&poly(&[1.0, 0.0, 1.0]), 0.5, 20, 1.0, 1e-9).unwrap();
    assert!(s.partial_sum.is_finite());
    assert!(s.tail_ratio < 1.0, "tail ratio {}", s.tail_ratio);
}

#[test]
fn ek_partial_sums_on_random_polynomials() {
    for id in 0..6u64 {
        let p = random_monic(id, 2 + (id as usize % 4));
        for alpha in [0.3, 0.5, 0.7] {
            let s = sum_ek_alpha(&p, alpha, 20, 1.0, 1e-9).unwrap();
            let mut run = 0.0;
            let mut prev = 0.0;
            for m in &s.measures {
                run += if *m > 0.0 { m.powf(alpha) } else { 0.0 };
                assert!(run >= prev);
                prev = run;
            }
            assert!(s.partial_sum.is_finite());
            assert!(s.tail_ratio < 1.0, "{p}: alpha {alpha} tail {}", s.tail_ratio);
        }
    }
}

#[test]
fn ek_measure_is_stable_under_resolution_halving() {
    let mut rng = seeded(11);
    for _ in 0..10 {
        let n = rng.gen_range(2..=5);
        let p = random_monic(rng.gen(), n);
        for k in [0, 3, 8] {
            let a = compute_ek(&p, k, 1.0, 1e-6).unwrap();
            let b = compute_ek(&p, k, 1.0, 5e-7).unwrap();
            let boundary = 2 * a.len().max(b.len());
            assert!((a.measure() - b.measure()).abs() < 2.0 * 1e-6 * boundary.max(1) as f64);
        }
    }
}

#[test]
fn gradient_bound_closed_forms() {
    assert!((verify_gradient_bound(&Polynomial::monomial(2), 0.5, 1000).unwrap() - 2.0).abs() < 1e-6);
    assert!((verify_gradient_bound(&Polynomial::monomial(3), 0.1, 1000).unwrap() - 3.0).abs() < 1e-6);
    assert_eq!(verify_gradient_bound(&poly(&[3.0, 1.0]), 0.37, 100).unwrap(), 1.0);
}

#[test]
fn total_variation_examples() {
    let grid: Vec<f64> = (0..=40_000).map(|i| -200.0 + i as f64 * 0.01).collect();
    let lorentz: Vec<f64> = grid.iter().map(|z| 1.0 / (1.0 + z * z)).collect();
    assert!(tv_sign_change_check(&lorentz, 1, 1.0).unwrap());
    assert!(tv_sign_change_check(&[0.5; 100], 0, 0.5).unwrap());
    let odd: Vec<f64> = grid.iter().map(|z| z * (-z * z).exp()).collect();
    let c = (0.5f64).sqrt() * (-0.5f64).exp();
    assert!(tv_sign_change_check(&odd, 2, c).unwrap());
    assert!(tv_sign_change_check(&lorentz, 1, 0.5).is_err());
}
