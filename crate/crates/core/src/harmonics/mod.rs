//! Harmonic analysis on S^d: Gegenbauer polynomials, zonal harmonics, cap
//! geometry and the Gegenbauer coefficients of normalized cap indicators,
//! plus explicit orthonormal bases of H_ν on S^2.

pub mod basis;
pub mod poly;
pub mod quadrature;

pub use basis::{harmonic_basis, HarmonicBasis};
pub use poly::{HarmonicPoly, IntEvaluator, Poly, RealPoly};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const UNIT_TOL: f64 = 1e-9;

/// A spherical cap `C_R(α) = {x ∈ S^d : |x - α| < R}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl CapSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 2.0) {
            return Err(Error::OutOfRange(format!("cap radius {radius} not in (0, 2]")));
        }
        check_unit(&center, 1e-12)?;
        Ok(Self { center, radius })
    }

    pub fn d(&self) -> usize {
        self.center.len() - 1
    }
}

/// `A_{r,R}(α) = {x ∈ S^d : r < |x - α| < R}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub center: Vec<f64>,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl AnnulusSpec {
    /// Accepts `r_inner == r_outer` (the empty annulus) in addition to the
    /// proper case `0 <= r_inner < r_outer <= 2`.
    pub fn new(center: Vec<f64>, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(0.0 <= r_inner && r_inner <= r_outer && r_outer <= 2.0) {
            return Err(Error::OutOfRange(format!("annulus radii ({r_inner}, {r_outer})")));
        }
        check_unit(&center, 1e-12)?;
        Ok(Self { center, r_inner, r_outer })
    }
}

fn check_unit(v: &[f64], tol: f64) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if v.len() < 3 || (norm - 1.0).abs() > tol {
        return Err(Error::OutOfRange(format!("vector of norm {norm} is not a unit vector in R^{}", v.len())));
    }
    Ok(())
}

/// `λ = (d-1)/2` and `c_ν = (ν+λ)/λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerParams {
    pub lambda: f64,
}

impl GegenbauerParams {
    pub fn for_dimension(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(d));
        }
        Ok(Self { lambda: (d as f64 - 1.0) / 2.0 })
    }

    pub fn c(&self, nu: usize) -> f64 {
        (nu as f64 + self.lambda) / self.lambda
    }
}

/// `C_ν^λ(t)` by the three-term recurrence.
pub fn gegenbauer(nu: usize, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!("lambda = {lambda}")));
    }
    if t.abs() > 1.0 + UNIT_TOL {
        return Err(Error::OutOfRange(format!("t = {t} outside [-1, 1]")));
    }
    Ok(gegenbauer_unchecked(nu, lambda, t.clamp(-1.0, 1.0)))
}

fn gegenbauer_unchecked(nu: usize, lambda: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if nu == 0 {
        return prev;
    }
    let mut cur = 2.0 * lambda * t;
    for k in 2..=nu {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda - 1.0) * t * cur - (kf + 2.0 * lambda - 2.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_0^λ(t), ..., C_{nu_max}^λ(t)`.
pub fn gegenbauer_all(nu_max: usize, lambda: f64, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nu_max + 1);
    out.push(1.0);
    if nu_max == 0 {
        return out;
    }
    out.push(2.0 * lambda * t);
    for k in 2..=nu_max {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda - 1.0) * t * out[k - 1] - (kf + 2.0 * lambda - 2.0) * out[k - 2]) / kf;
        out.push(next);
    }
    out
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `dim H_ν(S^d) = C(d+ν, ν) - C(d+ν-2, ν-2)`.
pub fn dim_h(nu: usize, d: usize) -> u64 {
    let (nu, d) = (nu as i64, d as i64);
    (binomial(d + nu, nu) - binomial(d + nu - 2, nu - 2)) as u64
}

/// `Z_ν(x, y) = c_ν C_ν^{(d-1)/2}(⟨x, y⟩)` on S^d.
pub fn zonal(nu: usize, d: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != d + 1 || y.len() != d + 1 {
        return Err(Error::Dimension(x.len().max(y.len())));
    }
    check_unit(x, UNIT_TOL)?;
    check_unit(y, UNIT_TOL)?;
    let params = GegenbauerParams::for_dimension(d)?;
    let t: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(params.c(nu) * gegenbauer_unchecked(nu, params.lambda, t.clamp(-1.0, 1.0)))
}

/// `ω_{d-1} / ω_d = 1 / ∫_0^π sin^{d-1}θ dθ`.
pub fn area_ratio(d: usize) -> f64 {
    // W_k = ∫_0^π sin^k, W_0 = π, W_1 = 2, W_k = (k-1)/k W_{k-2}
    let k = d - 1;
    let mut w = if k % 2 == 0 { PI } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        w *= (j as f64 - 1.0) / j as f64;
        j += 2;
    }
    1.0 / w
}

/// Angular radius `2 arcsin(R/2)` of a cap with Euclidean radius `R`.
pub fn angular_radius(r: f64) -> f64 {
    2.0 * (r / 2.0).min(1.0).asin()
}

/// Normalized measure of `C_R` on S^d.
pub fn cap_measure(r: f64, d: usize) -> Result<f64> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::OutOfRange(format!("cap radius {r} not in (0, 2]")));
    }
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if d == 2 {
        return Ok(r * r / 4.0);
    }
    let theta = angular_radius(r);
    let exp = (d - 1) as i32;
    let integral = quadrature::integrate_adaptive(|t| t.sin().powi(exp), 0.0, theta, 16, 1e-13, 12)
        .map_err(|change| Error::Quadrature { degree: 0, change })?;
    Ok((area_ratio(d) * integral).clamp(0.0, 1.0))
}

/// Gegenbauer coefficient `f̂_{R,α}(ν)` of the normalized cap indicator
/// `f_{R,α} = 1_{C_R(α)} / μ(C_R)`.
pub fn cap_gegenbauer_coeff(nu: usize, r: f64, d: usize) -> Result<f64> {
    Ok(cap_gegenbauer_coeffs(nu, r, d)?[nu])
}

/// `f̂_{R,α}(0), ..., f̂_{R,α}(nu_max)` in one pass.
///
/// The integral runs over the angle θ ∈ [0, 2 arcsin(R/2)) (equivalently
/// `t = cos θ ∈ (1 - R²/2, 1]`), where the integrand is smooth; nodes are
/// doubled until the coefficients stop moving at the 1e-10 level.
pub fn cap_gegenbauer_coeffs(nu_max: usize, r: f64, d: usize) -> Result<Vec<f64>> {
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::OutOfRange(format!("cap radius {r} not in (0, 2)")));
    }
    let params = GegenbauerParams::for_dimension(d)?;
    let mu = cap_measure(r, d)?;
    let theta = angular_radius(r);
    let ratio = area_ratio(d);
    let scale: Vec<f64> = (0..=nu_max).map(|nu| ratio * params.c(nu) / dim_h(nu, d) as f64 / mu).collect();
    let sin_exp = (d - 1) as i32;

    let estimate = |nodes: usize| -> Vec<f64> {
        let (x, w) = quadrature::gauss_legendre(nodes);
        let half = 0.5 * theta;
        let mut acc = vec![0.0; nu_max + 1];
        for (&xi, &wi) in x.iter().zip(&w) {
            let th = half * (xi + 1.0);
            let weight = wi * half * th.sin().powi(sin_exp);
            for (a, c) in acc.iter_mut().zip(gegenbauer_all(nu_max, params.lambda, th.cos())) {
                *a += weight * c;
            }
        }
        acc.iter().zip(&scale).map(|(a, s)| a * s).collect()
    };

    let n0 = ((nu_max + d) as f64 * theta / 2.0).ceil() as usize + 16;
    let max_change = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max);
    let first = estimate(n0);
    let second = estimate(2 * n0);
    let mut best = second;
    let mut change = max_change(&first, &best);
    if change > 1e-10 {
        let third = estimate(4 * n0);
        change = max_change(&best, &third);
        best = third;
        if change > 1e-10 {
            return Err(Error::Quadrature { degree: nu_max, change });
        }
    }
    best[0] = 1.0;
    Ok(best)
}

/// `n` nearly uniform points on S^2 (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect()
}
