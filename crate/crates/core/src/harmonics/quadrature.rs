//! Gauss–Legendre rules and a product rule on S^2.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// `∫_a^b f` with an `n`-point Gauss–Legendre rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// Integrates by doubling the node count from `n0` until two successive
/// estimates agree to `tol` (relative, floored at absolute `tol`). Returns
/// the estimate and the last change, or `Err(change)` after `max_doublings`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n0: usize,
    tol: f64,
    max_doublings: usize,
) -> Result<f64, f64> {
    let mut n = n0.max(2);
    let mut prev = integrate(&f, a, b, n);
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        n *= 2;
        let next = integrate(&f, a, b, n);
        change = (next - prev).abs() / next.abs().max(1.0);
        if change <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(change)
}

/// A product rule on S^2 (Gauss–Legendre in `z`, equispaced in azimuth)
/// integrating every polynomial of total degree `<= degree` exactly against
/// the normalized measure. Returns `(points, weights)` with weights summing
/// to 1.
pub fn sphere_rule(degree: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let nz = degree / 2 + 1;
    let nphi = degree + 1;
    let (zs, wz) = gauss_legendre(nz);
    let mut points = Vec::with_capacity(nz * nphi);
    let mut weights = Vec::with_capacity(nz * nphi);
    for (&z, &w) in zs.iter().zip(&wz) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for k in 0..nphi {
            let phi = 2.0 * PI * k as f64 / nphi as f64;
            points.push([s * phi.cos(), s * phi.sin(), z]);
            weights.push(0.5 * w / nphi as f64);
        }
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn adaptive_integration_of_smooth_function() {
        let v = integrate_adaptive(|t: f64| t.sin(), 0.0, PI, 4, 1e-13, 8).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_rule_moments() {
        let (pts, w) = sphere_rule(8);
        let m = |a: i32, b: i32, c: i32| -> f64 {
            pts.iter().zip(&w).map(|(p, wi)| wi * p[0].powi(a) * p[1].powi(b) * p[2].powi(c)).sum()
        };
        assert!((m(0, 0, 0) - 1.0).abs() < 1e-14);
        assert!((m(2, 0, 0) - 1.0 / 3.0).abs() < 1e-14);
        assert!((m(2, 2, 2) - 1.0 / 105.0).abs() < 1e-14);
        assert!((m(4, 2, 2) - 3.0 / 945.0).abs() < 1e-14);
        assert!(m(3, 1, 0).abs() < 1e-14);
    }
}
