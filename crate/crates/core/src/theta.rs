//! Theta-series coefficients of harmonic polynomials on Z³ and on the
//! quaternionic lattice Λ, the Kohnen lift coefficients A(n), and exact
//! checks of the Eichler commutation relation and the p-neighbor lemma.

use crate::error::{Error, Result};
use crate::harmonics::{fibonacci_sphere, HarmonicPoly, RealPoly};
use crate::hecke::hecke_apply;
use crate::lattice::representations;
use crate::number_theory::{chi4, divisor_count, divisors, legendre_symbol, mobius};
use crate::quaternion::norm_reps;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

pub const MAX_THETA_INDEX: u64 = 1_000_000;
pub const MAX_LIFT_INDEX: u64 = 500;
pub const MAX_EICHLER_PRIME: u64 = 20;
pub const MAX_EICHLER_DEGREE: usize = 6;
pub const MAX_EICHLER_N: u64 = 500;

/// Coefficient arithmetic shared by exact and floating-point evaluation.
pub trait Scalar: Clone + Send + Sync + std::fmt::Debug {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times_int(&self, k: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times_int(&self, k: &BigInt) -> Self {
        self * BigRational::from_integer(k.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times_int(&self, k: &BigInt) -> Self {
        self * k.to_f64().unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// A homogeneous polynomial on R³ whose values can be summed over lattice
/// points.
pub trait SphereFunction: Sync {
    type Value: Scalar;
    fn degree(&self) -> usize;
    fn sum_over(&self, points: &[Vec<i64>]) -> Self::Value;
    /// Σ |coefficients|, an upper bound for `|P|` on the unit sphere.
    fn magnitude(&self) -> f64;
}

impl SphereFunction for HarmonicPoly {
    type Value = BigRational;
    fn degree(&self) -> usize {
        HarmonicPoly::degree(self) as usize
    }
    fn sum_over(&self, points: &[Vec<i64>]) -> BigRational {
        self.integer_evaluator().sum(points)
    }
    fn magnitude(&self) -> f64 {
        self.to_real().terms.values().map(|c| c.abs()).sum()
    }
}

impl SphereFunction for RealPoly {
    type Value = f64;
    fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }
    fn sum_over(&self, points: &[Vec<i64>]) -> f64 {
        points.iter().map(|m| self.eval_int(m)).sum()
    }
    fn magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

fn check_index(n: u64) -> Result<()> {
    if n > MAX_THETA_INDEX {
        return Err(Error::OutOfRange(format!("theta index {n} exceeds {MAX_THETA_INDEX}")));
    }
    Ok(())
}

/// Membership in Λ = {(b, c, d) ∈ Z³ : b ≡ c ≡ d (mod 2)}.
pub fn in_lambda(v: &[i64]) -> bool {
    let par = v[0].rem_euclid(2);
    v.iter().all(|x| x.rem_euclid(2) == par)
}

/// `r_P(n) = Σ_{|m|² = n} P(m)` over Z³.
pub fn r_p<F: SphereFunction>(f: &F, n: u64) -> Result<F::Value> {
    check_index(n)?;
    if n == 0 {
        return Ok(F::Value::zero());
    }
    Ok(f.sum_over(&representations(n, 3)?))
}

/// Points of Λ with squared length `n`.
pub fn lambda_points(n: u64) -> Result<Vec<Vec<i64>>> {
    check_index(n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(representations(n, 3)?.into_iter().filter(|v| in_lambda(v)).collect())
}

/// `r_{Λ,P}(n) = Σ_{v ∈ Λ, |v|² = n} P(v)`.
pub fn r_lambda_p<F: SphereFunction>(f: &F, n: u64) -> Result<F::Value> {
    Ok(f.sum_over(&lambda_points(n)?))
}

/// Exact coefficients `n ↦ value` for `n` in `1..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSeries {
    pub label: String,
    pub values: BTreeMap<u64, BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaLattice {
    Z3,
    Lambda,
}

impl CoeffSeries {
    pub fn compute(poly: &HarmonicPoly, lattice: ThetaLattice, n_max: u64, label: impl Into<String>) -> Result<Self> {
        check_index(n_max)?;
        let values = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let v = match lattice {
                    ThetaLattice::Z3 => r_p(poly, n)?,
                    ThetaLattice::Lambda => r_lambda_p(poly, n)?,
                };
                Ok((n, v))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self { label: label.into(), values })
    }

    /// CSV with columns `n,numerator,denominator`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "numerator", "denominator"])?;
        for (n, v) in &self.values {
            w.write_record([n.to_string(), v.numer().to_string(), v.denom().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pow_int(base: u64, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

/// `A(n) = 2^ν Σ_{d | n} χ₄(d) d^ν r_P(n²/d²)` for odd `n <= 500`.
pub fn kohnen_lift_a<F: SphereFunction>(f: &F, n: u64) -> Result<F::Value> {
    if n == 0 || n % 2 == 0 || n > MAX_LIFT_INDEX {
        return Err(Error::OutOfRange(format!("lift index {n} must be odd and at most {MAX_LIFT_INDEX}")));
    }
    let nu = f.degree();
    let mut acc = F::Value::zero();
    for d in divisors(n)? {
        let chi = chi4(d as i64);
        if chi == 0 {
            continue;
        }
        let q = n / d;
        let term = r_p(f, q * q)?.times_int(&(pow_int(d, nu) * chi));
        acc = acc.plus(&term);
    }
    Ok(acc.times_int(&pow_int(2, nu)))
}

/// Tolerance below which a floating-point `A(1)` counts as zero, relative
/// to the size of the polynomial.
const VANISHING_TOL: f64 = 1e-9;

fn first_coefficient<F: SphereFunction>(f: &F) -> Result<f64> {
    let a1 = kohnen_lift_a(f, 1)?;
    // A(1) = 2^ν r_P(1) is a sum of six values of P at unit vectors.
    let scale = 2f64.powi(f.degree() as i32) * 6.0 * f.magnitude();
    if a1.is_zero() || a1.to_f64().abs() <= VANISHING_TOL * scale {
        return Err(Error::VanishingFirstCoefficient);
    }
    Ok(a1.to_f64())
}

/// Normalized Hecke eigenvalue `λ(n) = A(n) / A(1) · n^{-1/2-ν}`.
pub fn hecke_lambda<F: SphereFunction>(f: &F, n: u64) -> Result<f64> {
    let a1 = first_coefficient(f)?;
    let an = kohnen_lift_a(f, n)?.to_f64();
    Ok(an / a1 * (n as f64).powf(-0.5 - f.degree() as f64))
}

/// Relative residual of
/// `r_P(n²) = r_P(1) n^ν Σ_{δ | n} μ(n/δ) χ₄(n/δ) δ^{1/2} λ(δ)`.
pub fn mobius_inversion_identity_check<F: SphereFunction>(f: &F, n: u64) -> Result<f64> {
    if n == 0 || n % 2 == 0 || n > 300 {
        return Err(Error::OutOfRange(format!("index {n} must be odd and at most 300")));
    }
    first_coefficient(f)?;
    let nu = f.degree();
    let lhs = r_p(f, n * n)?.to_f64();
    let r1 = r_p(f, 1)?.to_f64();
    let mut sum = 0.0;
    for delta in divisors(n)? {
        let q = n / delta;
        let coeff = mobius(q)? * chi4(q as i64);
        if coeff != 0 {
            sum += coeff as f64 * (delta as f64).sqrt() * hecke_lambda(f, delta)?;
        }
    }
    let rhs = r1 * (n as f64).powi(nu as i32) * sum;
    Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EichlerFailure {
    pub n: u64,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EichlerReport {
    pub p: u64,
    pub nu: usize,
    #[serde(rename = "N_max")]
    pub n_max: u64,
    pub checked: u64,
    pub failures: Vec<EichlerFailure>,
}

impl EichlerReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The right-hand side `a(p²n) + p^ν (−n/p) a(n) + p^{1+2ν} a(n/p²)` of the
/// coefficient rule for `T_{p²}` in weight 3/2 + ν, with `a = r_{Λ,P}`.
pub fn eichler_rhs(p: u64, poly: &HarmonicPoly, n: u64) -> Result<BigRational> {
    let nu = poly.degree() as usize;
    let mut rhs = r_lambda_p(poly, p * p * n)?;
    let leg = legendre_symbol(-(n as i64), p as i64)?;
    if leg != 0 {
        rhs += r_lambda_p(poly, n)? * BigRational::from_integer(pow_int(p, nu) * leg);
    }
    if n % (p * p) == 0 {
        rhs += r_lambda_p(poly, n / (p * p))? * BigRational::from_integer(pow_int(p, 1 + 2 * nu));
    }
    Ok(rhs)
}

/// Checks, for every `1 <= n <= n_max`, that
/// `p^ν r_{Λ, T̃_p P}(n) = a(p²n) + p^ν (−n/p) a(n) + p^{1+2ν} a(n/p²)`.
///
/// `T̃_p` averages rotations `x ↦ z x z̄ / p`; the unnormalized conjugation
/// `x ↦ z x z̄` that carries Λ-vectors of norm `n` to norm `p²n` multiplies a
/// degree-ν polynomial by `p^ν`, which is the factor on the left.
pub fn eichler_verify(p: u64, poly: &HarmonicPoly, n_max: u64) -> Result<EichlerReport> {
    let nu = poly.degree() as usize;
    if p > MAX_EICHLER_PRIME {
        return Err(Error::OutOfRange(format!("p = {p} exceeds {MAX_EICHLER_PRIME}")));
    }
    if nu > MAX_EICHLER_DEGREE || poly.nvars() != 3 {
        return Err(Error::OutOfRange(format!("degree {nu} exceeds {MAX_EICHLER_DEGREE}")));
    }
    if n_max > MAX_EICHLER_N {
        return Err(Error::OutOfRange(format!("N_max = {n_max} exceeds {MAX_EICHLER_N}")));
    }
    norm_reps(p)?;
    let tp = hecke_apply(p, poly)?;
    let scale = BigRational::from_integer(pow_int(p, nu));
    let results: Vec<Option<EichlerFailure>> = (1..=n_max)
        .into_par_iter()
        .map(|n| -> Result<Option<EichlerFailure>> {
            let lhs = r_lambda_p(&tp, n)? * &scale;
            let rhs = eichler_rhs(p, poly, n)?;
            Ok((lhs != rhs).then(|| EichlerFailure { n, lhs: lhs.to_string(), rhs: rhs.to_string() }))
        })
        .collect::<Result<_>>()?;
    Ok(EichlerReport { p, nu, n_max, checked: n_max, failures: results.into_iter().flatten().collect() })
}

fn check_neighbor_args(v: &[i64; 3], p: u64) -> Result<()> {
    norm_reps(p)?;
    if p > MAX_EICHLER_PRIME {
        return Err(Error::OutOfRange(format!("p = {p} exceeds {MAX_EICHLER_PRIME}")));
    }
    if !in_lambda(v) {
        return Err(Error::OutOfRange(format!("{v:?} is not in Λ")));
    }
    Ok(())
}

/// Number of classes `γ O^×` with `nr(γ) = p` and `γ̄ v γ / p² ∈ Λ`, i.e.
/// the number of ways to write `v = γ w γ̄` with `w ∈ Λ`.
pub fn neighbor_count(v: [i64; 3], p: u64) -> Result<u64> {
    check_neighbor_args(&v, p)?;
    let reps = norm_reps(p)?;
    let modulus = 4 * (p * p) as i128;
    let count = reps
        .classes
        .iter()
        .filter(|g| {
            let w = g.conjugate_pure_times4(v);
            if w.iter().any(|c| c % modulus != 0) {
                return false;
            }
            let u: Vec<i64> = w.iter().map(|c| (c / modulus) as i64).collect();
            in_lambda(&u)
        })
        .count();
    Ok(count as u64)
}

/// The count predicted by the p-neighbor lemma for `v` with `p² | |v|²`:
/// 1 off `pΛ`, `1 + (−n/p)` on `pΛ \ p²Λ` (`|v|² = p²n`), `p + 1` on `p²Λ`.
pub fn neighbor_count_lemma(v: [i64; 3], p: u64) -> Result<u64> {
    check_neighbor_args(&v, p)?;
    let pi = p as i64;
    let norm: i64 = v.iter().map(|x| x * x).sum();
    if norm % (pi * pi) != 0 {
        return Err(Error::OutOfRange(format!("p² does not divide |v|² = {norm}")));
    }
    let in_multiple = |k: i64| v.iter().all(|x| x % k == 0) && in_lambda(&v.map(|x| x / k));
    Ok(if in_multiple(pi * pi) {
        p + 1
    } else if in_multiple(pi) {
        (1 + legendre_symbol(-(norm / (pi * pi)), pi)?) as u64
    } else {
        1
    })
}

/// Both sides of `Σ_{v ∈ R(p²n, Λ)} P(v) π(v) = a(p²n) + p^ν(−n/p) a(n) + p^{1+2ν} a(n/p²)`.
pub fn aggregate_identity(p: u64, poly: &HarmonicPoly, n: u64) -> Result<(BigRational, BigRational)> {
    let eval = poly.integer_evaluator();
    let mut lhs = <BigRational as Zero>::zero();
    for v in lambda_points(p * p * n)? {
        let k = neighbor_count([v[0], v[1], v[2]], p)?;
        if k > 0 {
            lhs += eval.eval(&v) * BigRational::from_integer(BigInt::from(k));
        }
    }
    Ok((lhs, eichler_rhs(p, poly, n)?))
}

/// Approximate `max_{S²} |P|`: the best of a 20000-point Fibonacci grid,
/// followed by one local refinement around the top candidates.
pub fn sup_norm(poly: &RealPoly) -> f64 {
    const GRID: usize = 20_000;
    let grid = fibonacci_sphere(GRID);
    let mut vals: Vec<(f64, [f64; 3])> = grid.par_iter().map(|x| (poly.eval(x).abs(), *x)).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let spacing = (4.0 * std::f64::consts::PI / GRID as f64).sqrt();
    let mut best = vals[0].0;
    for &(_, x) in vals.iter().take(8) {
        // tangent frame at x
        let a = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let t1 = normalize(cross(x, a));
        let t2 = cross(x, t1);
        for i in -4..=4 {
            for j in -4..=4 {
                let s = spacing * 0.25;
                let y = normalize([
                    x[0] + s * (i as f64 * t1[0] + j as f64 * t2[0]),
                    x[1] + s * (i as f64 * t1[1] + j as f64 * t2[1]),
                    x[2] + s * (i as f64 * t1[2] + j as f64 * t2[2]),
                ]);
                best = best.max(poly.eval(&y).abs());
            }
        }
    }
    best
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRange {
    pub lo: u64,
    pub hi: u64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub sup_norm: f64,
    pub ranges: Vec<GrowthRange>,
    /// Largest ratio over all odd `n` checked.
    pub constant: f64,
}

impl GrowthReport {
    /// The last dyadic range does not exceed the maximum seen before it.
    pub fn max_is_stable(&self) -> bool {
        match self.ranges.split_last() {
            Some((last, earlier)) if !earlier.is_empty() => {
                last.max_ratio <= earlier.iter().map(|r| r.max_ratio).fold(0.0, f64::max) * (1.0 + 1e-12)
            }
            _ => true,
        }
    }
}

/// `|r_P(n²)| / (n^{ν+1/2} d(n) ‖P‖_∞)` over odd `n <= n_max`, grouped into
/// dyadic ranges `[2^k, 2^{k+1})`.
pub fn coefficient_growth(poly: &RealPoly, n_max: u64) -> Result<GrowthReport> {
    let sup = sup_norm(poly);
    let nu = SphereFunction::degree(poly) as f64;
    let ratios: Vec<(u64, f64)> = (1..=n_max)
        .into_par_iter()
        .filter(|n| n % 2 == 1)
        .map(|n| {
            let r = r_p(poly, n * n)?;
            Ok((n, r.abs() / ((n as f64).powf(nu + 0.5) * divisor_count(n)? as f64 * sup)))
        })
        .collect::<Result<_>>()?;
    let mut ranges: Vec<GrowthRange> = Vec::new();
    for (n, r) in ratios {
        let lo = 1u64 << (63 - n.leading_zeros());
        match ranges.last_mut() {
            Some(g) if g.lo == lo => g.max_ratio = g.max_ratio.max(r),
            _ => ranges.push(GrowthRange { lo, hi: 2 * lo - 1, max_ratio: r }),
        }
    }
    let constant = ranges.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(GrowthReport { sup_norm: sup, ranges, constant })
}
