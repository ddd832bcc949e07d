use proptest::prelude::*;
use rsl_core::harmonics::*;

/// `Σ_{ν ≤ N} f̂(ν)² (2ν+1)` relative to `1/μ(C_R)` on S².
fn parseval_deficit(r: f64, n: usize) -> f64 {
    let c = cap_gegenbauer_coeffs(n, r, 2).unwrap();
    let s: f64 = c.iter().enumerate().map(|(v, f)| f * f * (2 * v + 1) as f64).sum();
    let target = 1.0 / cap_measure(r, 2).unwrap();
    (target - s) / target
}

#[test]
fn parseval_partial_sums_converge() {
    for r in [0.05, 0.1, 0.2] {
        let mut prev = f64::INFINITY;
        for scale in [10.0, 20.0, 40.0, 80.0] {
            let d = parseval_deficit(r, (scale / r) as usize);
            assert!(d > 0.0 && d < prev, "R={r} NR={scale}: {d}");
            prev = d;
        }
        // the tail behaves like C²/(4 N R)
        assert!(parseval_deficit(r, (80.0 / r) as usize) < 0.01);
    }
}

#[test]
fn coefficient_decay_constant_is_stable() {
    let constants: Vec<f64> = [0.05, 0.1, 0.2]
        .iter()
        .map(|&r| {
            let c = cap_gegenbauer_coeffs((400.0 / r) as usize, r, 2).unwrap();
            c.iter()
                .enumerate()
                .filter(|(v, _)| *v as f64 * r > 10.0)
                .map(|(v, f)| f.abs() * (v as f64 * r).powf(1.5))
                .fold(0.0, f64::max)
        })
        .collect();
    let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.05, "{constants:?}");
}

#[test]
fn cap_measure_remainder_is_order_r_d_plus_2() {
    for d in [2usize, 3, 4] {
        let ratios: Vec<f64> = (0..=40)
            .map(|i| {
                let r = 0.01 * 50f64.powf(i as f64 / 40.0);
                let lead = area_ratio(d) * r.powi(d as i32) / d as f64;
                (cap_measure(r, d).unwrap() - lead).abs() / r.powi(d as i32 + 2)
            })
            .collect();
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        // bounded, and not growing as R shrinks
        assert!(max < 0.05, "d={d}");
        assert!(ratios[0] <= ratios[40] * 1.01 + 1e-9, "d={d}: {ratios:?}");
    }
}

#[test]
fn pre_trace_on_random_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    for nu in 0..=8 {
        let b = harmonic_basis(nu).unwrap();
        for _ in 0..100 {
            let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let x = [v[0] / n, v[1] / n, v[2] / n];
            let s: f64 = b.orthonormal.iter().map(|p| p.eval(&x).powi(2)).sum();
            assert!((s - (2 * nu + 1) as f64).abs() < 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn gegenbauer_three_term_recurrence(nu in 1usize..40, d in 2usize..6, t in -1.0f64..1.0) {
        let lambda = (d as f64 - 1.0) / 2.0;
        let c = |k: usize| gegenbauer(k, lambda, t).unwrap();
        let lhs = (nu as f64 + 1.0) * c(nu + 1);
        let rhs = 2.0 * (nu as f64 + lambda) * t * c(nu) - (nu as f64 + 2.0 * lambda - 1.0) * c(nu - 1);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn zonal_is_symmetric_and_peaks_at_dim(nu in 0usize..12, a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::PI) {
        let x = [b.sin() * a.cos(), b.sin() * a.sin(), b.cos()];
        let y = [0.0, 0.6, 0.8];
        let zxy = zonal(nu, 2, &x, &y).unwrap();
        prop_assert!((zxy - zonal(nu, 2, &y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(zxy.abs() <= dim_h(nu, 2) as f64 + 1e-9);
        prop_assert!((zonal(nu, 2, &y, &y).unwrap() - dim_h(nu, 2) as f64).abs() < 1e-9);
    }

    #[test]
    fn cap_coefficients_are_bounded_by_one(r in 0.05f64..1.9, d in 2usize..5) {
        let c = cap_gegenbauer_coeffs(30, r, d).unwrap();
        prop_assert_eq!(c[0], 1.0);
        prop_assert!(c.iter().all(|v| v.abs() <= 1.0 + 1e-9));
    }
}
