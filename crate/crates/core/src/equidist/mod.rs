//! Cap and annulus statistics for rational point sets, Weyl sums, the
//! Monte-Carlo variance, covering radii, and the minimal-|z| solver.

pub mod covering;
pub mod linnik;

use crate::error::{Error, Result};
use crate::harmonics::{cap_measure, AnnulusSpec, CapSpec, HarmonicPoly};
use crate::lattice::{omega_n, representations, PointSet, PointSetLabel, RationalSpherePoint};
use crate::number_theory::{chi4, divisor_count, divisors, factorize, mobius};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub use covering::{
    covering_exponent_estimate, covering_radius, generic_covering_radius, uncovered_fraction, CoveringMethod,
    CoveringReport, ExponentFit,
};
pub use linnik::{linnik_dyadic_fit, linnik_exponent_scan, linnik_min_z, LinnikResult, LinnikRow};

/// Width of the band around a comparison threshold inside which the float
/// result is re-checked exactly.
const GUARD_BAND: f64 = 1e-12;

/// A sphere center kept both as floats and as the exact rationals those
/// floats denote.
struct Center<'a> {
    float: &'a [f64],
    exact: std::sync::OnceLock<Vec<BigRational>>,
}

impl<'a> Center<'a> {
    fn new(float: &'a [f64]) -> Self {
        Self { float, exact: std::sync::OnceLock::new() }
    }

    fn exact(&self) -> &[BigRational] {
        self.exact.get_or_init(|| self.float.iter().map(|&a| exact_float(a)).collect())
    }
}

fn exact_float(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn dist_sq_float(m: &[i64], n: u64, alpha: &[f64]) -> f64 {
    let nf = n as f64;
    m.iter().zip(alpha).map(|(&mi, &a)| (mi as f64 / nf - a).powi(2)).sum()
}

fn dist_sq_exact(m: &[i64], n: u64, alpha: &[BigRational]) -> BigRational {
    let nb = BigInt::from(n);
    m.iter()
        .zip(alpha)
        .map(|(&mi, a)| {
            let d = BigRational::new(BigInt::from(mi), nb.clone()) - a;
            &d * &d
        })
        .sum()
}

/// Sign of `|m/n - α|² - r²`, exact whenever the float value is within the
/// guard band of `r²`.
fn compare_dist_sq(m: &[i64], n: u64, center: &Center, r: f64, r_exact: &std::sync::OnceLock<BigRational>) -> Ordering {
    let r2 = r * r;
    let s = dist_sq_float(m, n, center.float);
    if (s - r2).abs() > GUARD_BAND * r2.max(1.0) {
        return s.total_cmp(&r2);
    }
    let re = r_exact.get_or_init(|| {
        let e = exact_float(r);
        &e * &e
    });
    dist_sq_exact(m, n, center.exact()).cmp(re)
}

/// Whether `m/n` lies in the open cap, by the hybrid test.
pub fn in_cap(m: &[i64], n: u64, cap: &CapSpec) -> bool {
    compare_dist_sq(m, n, &Center::new(&cap.center), cap.radius, &Default::default()) == Ordering::Less
}

/// Whether `m/n` lies in the open cap, decided entirely in rationals.
pub fn in_cap_exact(m: &[i64], n: u64, cap: &CapSpec) -> bool {
    let alpha: Vec<BigRational> = cap.center.iter().map(|&a| exact_float(a)).collect();
    let r = exact_float(cap.radius);
    dist_sq_exact(m, n, &alpha) < &r * &r
}

fn check_dims(points: &PointSet, center: &[f64]) -> Result<()> {
    if center.len() != points.d + 1 {
        return Err(Error::Dimension(center.len().saturating_sub(1)));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapCountResult {
    pub label: PointSetLabel,
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha: Vec<f64>,
    pub count: u64,
    /// `|points| · μ(C_R)`.
    pub expected: f64,
    /// `count / expected`, or 0 when nothing is expected.
    pub ratio: f64,
}

fn count_in_cap(points: &[RationalSpherePoint], center: &Center, r: f64) -> u64 {
    let r_exact = std::sync::OnceLock::new();
    points.iter().filter(|p| compare_dist_sq(&p.m, p.n, center, r, &r_exact) == Ordering::Less).count() as u64
}

/// `|points ∩ C_R(α)|` and its ratio to `|points| μ(C_R)`.
pub fn cap_count(points: &PointSet, cap: &CapSpec) -> Result<CapCountResult> {
    check_dims(points, &cap.center)?;
    let center = Center::new(&cap.center);
    let count = count_in_cap(&points.points, &center, cap.radius);
    let expected = points.len() as f64 * cap_measure(cap.radius, points.d)?;
    let ratio = if expected > 0.0 { count as f64 / expected } else { 0.0 };
    Ok(CapCountResult { label: points.label, r: cap.radius, alpha: cap.center.clone(), count, expected, ratio })
}

/// Number of points with `r_inner < |x - α| < r_outer`.
pub fn annulus_count(points: &PointSet, annulus: &AnnulusSpec) -> Result<u64> {
    check_dims(points, &annulus.center)?;
    if annulus.r_inner >= annulus.r_outer {
        return Ok(0);
    }
    let center = Center::new(&annulus.center);
    let (inner, outer) = (std::sync::OnceLock::new(), std::sync::OnceLock::new());
    Ok(points
        .points
        .iter()
        .filter(|p| {
            compare_dist_sq(&p.m, p.n, &center, annulus.r_outer, &outer) == Ordering::Less
                && compare_dist_sq(&p.m, p.n, &center, annulus.r_inner, &inner) == Ordering::Greater
        })
        .count() as u64)
}

/// `Σ_{x ∈ Ω_n} P(x)` exactly, through
/// `n^{-ν} Σ_{δ | n} μ(δ) δ^ν Σ_{|m|² = (n/δ)²} P(m)`.
pub fn weyl_sum_exact(n: u64, poly: &HarmonicPoly) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::OutOfRange("height must be positive".into()));
    }
    let nu = poly.degree() as usize;
    let eval = poly.integer_evaluator();
    let mut total = BigRational::zero();
    for delta in divisors(n)? {
        let mu = mobius(delta)?;
        if mu == 0 {
            continue;
        }
        let q = n / delta;
        let reps = representations(q * q, poly.nvars())?;
        let s = eval.sum(&reps);
        total += s * BigRational::from_integer(BigInt::from(mu) * num_traits::pow(BigInt::from(delta), nu));
    }
    Ok(total / BigRational::from_integer(num_traits::pow(BigInt::from(n), nu)))
}

/// `Σ_{x ∈ Ω_n} P(x)` evaluated in floating point over the enumerated set.
pub fn weyl_sum(n: u64, poly: &HarmonicPoly) -> Result<f64> {
    let set = omega_n(n, poly.nvars() - 1)?;
    let real = poly.to_real();
    Ok(set.points.iter().map(|p| real.eval(&p.to_unit())).sum())
}

/// Uniform point on S^d from a seeded stream: normalized Gaussian vector.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// The `i`-th of several independent streams split from one seed.
pub fn stream_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// `count / expected` for `samples` random caps of radius `r`; sample `i`
/// draws its center from stream `i`.
pub fn random_cap_ratios(points: &PointSet, r: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let expected = points.len() as f64 * cap_measure(r, points.d)?;
    let dim = points.d + 1;
    Ok((0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let alpha = random_unit_vector(&mut stream_rng(seed, i), dim);
            count_in_cap(&points.points, &Center::new(&alpha), r) as f64 / expected
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub samples: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

/// Median and quartiles (linear interpolation between order statistics).
pub fn summarize_ratios(ratios: &[f64]) -> RatioSummary {
    let mut v = ratios.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |t: f64| -> f64 {
        if v.is_empty() {
            return f64::NAN;
        }
        let pos = t * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
    RatioSummary { samples: v.len(), median, q1, q3, iqr: q3 - q1 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub n: u64,
    #[serde(rename = "R")]
    pub r: f64,
    pub num_samples: usize,
    pub seed: u64,
    pub mean_ratio: f64,
    pub variance: f64,
    pub std_error: f64,
    /// `d(n) / (|Ω_n| μ(C_R))`.
    pub bound: f64,
}

pub const MIN_VARIANCE_SAMPLES: usize = 100;

/// Monte-Carlo estimate of `∫ (|Ω_n ∩ C_R(α)| / (|Ω_n| μ(C_R)) - 1)² dμ(α)`
/// on S².
pub fn variance_mc(n: u64, r: f64, num_samples: usize, seed: u64) -> Result<VarianceEstimate> {
    if n % 2 == 0 {
        return Err(Error::OutOfRange(format!("height {n} must be odd")));
    }
    if num_samples < MIN_VARIANCE_SAMPLES {
        return Err(Error::OutOfRange(format!("need at least {MIN_VARIANCE_SAMPLES} samples")));
    }
    let set = omega_n(n, 2)?;
    let ratios = random_cap_ratios(&set, r, num_samples, seed)?;
    let k = num_samples as f64;
    let sq: Vec<f64> = ratios.iter().map(|x| (x - 1.0).powi(2)).collect();
    let variance = sq.iter().sum::<f64>() / k;
    let spread = sq.iter().map(|s| (s - variance).powi(2)).sum::<f64>() / (k - 1.0);
    let bound = divisor_count(n)? as f64 / (set.len() as f64 * cap_measure(r, 2)?);
    Ok(VarianceEstimate {
        n,
        r,
        num_samples,
        seed,
        mean_ratio: ratios.iter().sum::<f64>() / k,
        variance,
        std_error: (spread / k).sqrt(),
        bound,
    })
}

/// `|m/n - m'/n'|²` exactly.
pub fn squared_distance_exact(a: &RationalSpherePoint, b: &RationalSpherePoint) -> BigRational {
    let alpha: Vec<BigRational> =
        b.m.iter().map(|&x| BigRational::new(BigInt::from(x), BigInt::from(b.n))).collect();
    dist_sq_exact(&a.m, a.n, &alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineConstant {
    pub tau: f64,
    pub c: f64,
    pub heights: Vec<u64>,
    pub samples_per_height: usize,
    pub seed: u64,
    /// Mean of `|Ω_n ∩ C_ψ(n)(α)| / (n^{1-2τ} ∏_{p|n}(1 - χ(p)/p))`.
    pub empirical: f64,
    pub std_error: f64,
    /// `3c²/2`, from `|Ω_n| μ(C_ψ)`.
    pub direct: f64,
    /// `3c²/(2√π)`.
    pub with_sqrt_pi: f64,
}

/// Empirical constant in `|Ω_n ∩ C_{cn^{-τ}}(α)| ~ K n^{1-2τ} ∏(1 - χ(p)/p)`
/// averaged over heights and random centers.
pub fn diophantine_constant(heights: &[u64], tau: f64, c: f64, samples: usize, seed: u64) -> Result<DiophantineConstant> {
    let mut values = Vec::with_capacity(heights.len() * samples);
    for (h, &n) in heights.iter().enumerate() {
        let set = omega_n(n, 2)?;
        let r = c * (n as f64).powf(-tau);
        let euler: f64 = factorize(n)?.primes().map(|p| 1.0 - chi4(p as i64) as f64 / p as f64).product();
        let norm = (n as f64).powf(1.0 - 2.0 * tau) * euler;
        let expected = set.len() as f64 * cap_measure(r, 2)?;
        let ratios = random_cap_ratios(&set, r, samples, seed.wrapping_add(h as u64))?;
        values.extend(ratios.into_iter().map(|x| x * expected / norm));
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    Ok(DiophantineConstant {
        tau,
        c,
        heights: heights.to_vec(),
        samples_per_height: samples,
        seed,
        empirical: mean,
        std_error: (var / k).sqrt(),
        direct: 1.5 * c * c,
        with_sqrt_pi: 1.5 * c * c / std::f64::consts::PI.sqrt(),
    })
}

/// `BigRational` to `f64`, saturating to NaN if not representable.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
