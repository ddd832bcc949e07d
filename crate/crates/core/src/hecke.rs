//! The Hecke operators `(T̃_p f)(x) = (1/24) Σ_{nr(z) = p} f(z x z̄ / p)` on
//! harmonic polynomials in three variables, their matrices on H_ν, and
//! simultaneous eigenbases.

use crate::error::{Error, Result};
use crate::harmonics::{harmonic_basis, HarmonicPoly, Poly, RealPoly};
use crate::quaternion::{norm_reps, HurwitzQuaternion};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const MAX_HECKE_PRIME: u64 = 50;
pub const MAX_HECKE_DEGREE: usize = 8;
/// Seed for the random linear combination used in joint diagonalization.
pub const DEFAULT_EIGEN_SEED: u64 = 0x5EED_4ECC;

// ---------------------------------------------------------------------------
// Dense homogeneous polynomials in three variables, used for the exact
// substitution x ↦ M x.

trait Ring: Clone + Send + Sync {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn mul_add(acc: &mut Self, a: &Self, b: &Self) -> Option<()>;
    fn add_assign(acc: &mut Self, a: &Self) -> Option<()>;
    fn to_big(&self) -> BigInt;
}

impl Ring for i128 {
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn mul_add(acc: &mut Self, a: &Self, b: &Self) -> Option<()> {
        *acc = acc.checked_add(a.checked_mul(*b)?)?;
        Some(())
    }
    fn add_assign(acc: &mut Self, a: &Self) -> Option<()> {
        *acc = acc.checked_add(*a)?;
        Some(())
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn mul_add(acc: &mut Self, a: &Self, b: &Self) -> Option<()> {
        *acc += a * b;
        Some(())
    }
    fn add_assign(acc: &mut Self, a: &Self) -> Option<()> {
        *acc += a;
        Some(())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

fn dense_len(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Position of `x^a y^b z^{k-a-b}` in a dense degree-`k` vector.
fn dense_index(k: usize, a: usize, b: usize) -> usize {
    a * (k + 1) - a * a.saturating_sub(1) / 2 + b
}

fn dense_mul<R: Ring>(lhs: &[R], ka: usize, rhs: &[R], kb: usize) -> Option<Vec<R>> {
    let k = ka + kb;
    let mut out = vec![R::zero(); dense_len(k)];
    for a1 in 0..=ka {
        for b1 in 0..=ka - a1 {
            let c1 = &lhs[dense_index(ka, a1, b1)];
            if c1.to_big().is_zero() {
                continue;
            }
            for a2 in 0..=kb {
                for b2 in 0..=kb - a2 {
                    let c2 = &rhs[dense_index(kb, a2, b2)];
                    R::mul_add(&mut out[dense_index(k, a1 + a2, b1 + b2)], c1, c2)?;
                }
            }
        }
    }
    Some(out)
}

/// `Σ_M P(M x)` over the given integer matrices, for `P` given by integer
/// coefficients of a homogeneous polynomial of degree `k`.
fn sum_of_substitutions<R: Ring>(terms: &[([usize; 3], BigInt)], k: usize, mats: &[[[i64; 3]; 3]]) -> Option<Vec<R>> {
    let coeffs: Vec<([usize; 3], R)> = terms.iter().map(|(e, c)| R::from_big(c).map(|c| (*e, c))).collect::<Option<_>>()?;
    let partials: Vec<Option<Vec<R>>> = mats
        .par_iter()
        .map(|m| {
            // powers[r][j] = (row r of M · x)^j
            let mut powers: Vec<Vec<Vec<R>>> = Vec::with_capacity(3);
            for row in m {
                let lin = {
                    let mut v = vec![R::zero(); 3];
                    v[dense_index(1, 1, 0)] = R::from_i64(row[0]);
                    v[dense_index(1, 0, 1)] = R::from_i64(row[1]);
                    v[dense_index(1, 0, 0)] = R::from_i64(row[2]);
                    v
                };
                let mut ps = vec![vec![R::from_i64(1)]];
                for j in 1..=k {
                    let next = dense_mul(&ps[j - 1], j - 1, &lin, 1)?;
                    ps.push(next);
                }
                powers.push(ps);
            }
            let mut acc = vec![R::zero(); dense_len(k)];
            for (e, c) in &coeffs {
                let xy = dense_mul(&powers[0][e[0]], e[0], &powers[1][e[1]], e[1])?;
                let xyz = dense_mul(&xy, e[0] + e[1], &powers[2][e[2]], e[2])?;
                for (a, v) in acc.iter_mut().zip(&xyz) {
                    R::mul_add(a, c, v)?;
                }
            }
            Some(acc)
        })
        .collect();
    let mut total = vec![R::zero(); dense_len(k)];
    for part in partials {
        for (t, v) in total.iter_mut().zip(&part?) {
            R::add_assign(t, v)?;
        }
    }
    Some(total)
}

fn check_hecke_args(p: u64, nu: usize) -> Result<()> {
    if p > MAX_HECKE_PRIME {
        return Err(Error::OutOfRange(format!("Hecke prime {p} exceeds {MAX_HECKE_PRIME}")));
    }
    if nu > MAX_HECKE_DEGREE {
        return Err(Error::OutOfRange(format!("degree {nu} exceeds {MAX_HECKE_DEGREE}")));
    }
    Ok(())
}

/// `T̃_p P`, computed by exact substitution of each rotation into `P`.
pub fn hecke_apply(p: u64, poly: &HarmonicPoly) -> Result<HarmonicPoly> {
    if poly.nvars() != 3 {
        return Err(Error::Dimension(poly.nvars() - 1));
    }
    let k = poly.degree() as usize;
    check_hecke_args(p, k)?;
    let reps = norm_reps(p)?;
    if poly.poly().is_zero() {
        return Ok(poly.clone());
    }
    // z and -z give the same rotation: sum over one of each pair, count twice.
    let mats: Vec<[[i64; 3]; 3]> = reps
        .reps
        .iter()
        .filter(|z| z.twice().iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
        .map(HurwitzQuaternion::rotation_matrix_twice)
        .collect();
    debug_assert_eq!(mats.len() * 2, reps.reps.len());

    let den = poly.poly().common_denominator();
    let terms: Vec<([usize; 3], BigInt)> = poly
        .poly()
        .terms()
        .iter()
        .map(|(e, c)| ([e[0] as usize, e[1] as usize, e[2] as usize], (c * BigRational::from_integer(den.clone())).to_integer()))
        .collect();
    let total: Vec<BigInt> = match sum_of_substitutions::<i128>(&terms, k, &mats) {
        Some(v) => v.iter().map(Ring::to_big).collect(),
        None => sum_of_substitutions::<BigInt>(&terms, k, &mats).expect("big integers do not overflow"),
    };
    // (1/24) · 2 · Σ_half P(M x / (4p)) = Σ_half P(M x) / (12 (4p)^k)
    let scale = BigInt::from(12) * num_traits::pow(BigInt::from(4 * p), k) * den;
    let mut out = Poly::zero(3);
    for a in 0..=k {
        for b in 0..=k - a {
            let c = &total[dense_index(k, a, b)];
            if !c.is_zero() {
                out.add_term(vec![a as u32, b as u32, (k - a - b) as u32], BigRational::new(c.clone(), scale.clone()));
            }
        }
    }
    Ok(HarmonicPoly::new_unchecked(out, k as u32))
}

/// Square matrix of exact rationals.
pub type RationalMatrix = Vec<Vec<BigRational>>;

pub fn rational_matmul(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

pub fn rational_trace(a: &RationalMatrix) -> BigRational {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

/// Writes a rational matrix as CSV, one row per line, entries as `a/b`.
pub fn write_matrix_csv<W: std::io::Write>(m: &RationalMatrix, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Matrix of `T̃_p` on H_ν in the exact orthogonal basis of
/// [`harmonic_basis`]: column `j` holds the coordinates of `T̃_p Q_j`.
pub fn hecke_matrix(p: u64, nu: usize) -> Result<RationalMatrix> {
    check_hecke_args(p, nu)?;
    let basis = harmonic_basis(nu)?;
    let columns: Vec<Vec<BigRational>> = basis
        .orthogonal
        .par_iter()
        .map(|q| hecke_apply(p, q).map(|t| basis.coordinates(t.poly())))
        .collect::<Result<_>>()?;
    let n = basis.len();
    Ok((0..n).map(|i| (0..n).map(|j| columns[j][i].clone()).collect()).collect())
}

/// The same operator in the orthonormal basis, as floats.
pub fn hecke_matrix_orthonormal(p: u64, nu: usize) -> Result<DMatrix<f64>> {
    let m = hecke_matrix(p, nu)?;
    let norms = harmonic_basis(nu)?.norms();
    let n = m.len();
    Ok(DMatrix::from_fn(n, n, |i, j| m[i][j].to_f64().unwrap() * norms[i] / norms[j]))
}

/// A simultaneous eigenfunction of the requested `T̃_p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub poly: RealPoly,
    /// Coordinates in the orthonormal basis of H_ν.
    pub coords: Vec<f64>,
    pub eigenvalues: BTreeMap<u64, f64>,
    pub residuals: BTreeMap<u64, f64>,
    /// Index of the joint eigenspace (block) this function belongs to.
    pub block: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eigenbasis {
    pub degree: usize,
    pub primes: Vec<u64>,
    pub seed: u64,
    /// Number of random draws used (1 unless a redraw was needed).
    pub draws: usize,
    pub functions: Vec<Eigenfunction>,
    /// Dimension of each joint eigenspace, in block order.
    pub block_dims: Vec<usize>,
}

pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

pub fn hecke_eigenbasis(nu: usize, primes: &[u64]) -> Result<Eigenbasis> {
    hecke_eigenbasis_seeded(nu, primes, DEFAULT_EIGEN_SEED)
}

/// Joint eigendecomposition of the commuting symmetric matrices of `T̃_p`
/// (p in `primes`) on H_ν, via the spectrum of a random linear combination.
pub fn hecke_eigenbasis_seeded(nu: usize, primes: &[u64], seed: u64) -> Result<Eigenbasis> {
    if primes.is_empty() {
        return Err(Error::OutOfRange("no primes given".into()));
    }
    let mats: Vec<DMatrix<f64>> = primes
        .iter()
        .map(|&p| hecke_matrix_orthonormal(p, nu).map(|m| (&m + m.transpose()) * 0.5))
        .collect::<Result<_>>()?;
    let n = mats[0].nrows();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    const ATTEMPTS: usize = 3;
    for draw in 1..=ATTEMPTS {
        let weights: Vec<f64> = primes.iter().map(|_| rng.random_range(0.5..1.5)).collect();
        let mut combo = DMatrix::<f64>::zeros(n, n);
        for (w, m) in weights.iter().zip(&mats) {
            combo += m * *w;
        }
        let eig = SymmetricEigen::new(combo);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));

        let mut functions = Vec::with_capacity(n);
        let mut block_dims: Vec<usize> = Vec::new();
        let mut last: Option<f64> = None;
        worst = 0.0;
        for &idx in &order {
            let lambda = eig.eigenvalues[idx];
            if last.is_none_or(|l| (lambda - l).abs() > 1e-7 * scale) {
                block_dims.push(0);
            }
            last = Some(lambda);
            *block_dims.last_mut().unwrap() += 1;
            let mut v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
            // sign convention: largest-magnitude coordinate positive
            let pivot = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() + 1e-12 { i } else { best });
            if v[pivot] < 0.0 {
                v = -v;
            }
            let mut eigenvalues = BTreeMap::new();
            let mut residuals = BTreeMap::new();
            for (&p, m) in primes.iter().zip(&mats) {
                let mv = m * &v;
                let rq = v.dot(&mv);
                let res = (mv - &v * rq).norm();
                worst = worst.max(res);
                eigenvalues.insert(p, rq);
                residuals.insert(p, res);
            }
            let basis = harmonic_basis(nu)?;
            let mut poly = RealPoly::zero(3);
            for (c, b) in v.iter().zip(&basis.orthonormal) {
                poly.axpy(*c, b);
            }
            functions.push(Eigenfunction {
                poly,
                coords: v.iter().cloned().collect(),
                eigenvalues,
                residuals,
                block: block_dims.len() - 1,
            });
        }
        if worst <= EIGEN_RESIDUAL_TOL {
            return Ok(Eigenbasis { degree: nu, primes: primes.to_vec(), seed, draws: draw, functions, block_dims });
        }
    }
    Err(Error::Eigenbasis { residual: worst, attempts: ATTEMPTS })
}
