//! Explicit bases of H_ν(S^2).
//!
//! A spanning set comes from harmonic extension off the plane z = 0: for each
//! monomial `x^a y^b` the polynomials
//!
//! ```text
//! Σ_k (-1)^k z^{2k}   / (2k)!   Δ^k (x^a y^b)     (a + b = ν)
//! Σ_k (-1)^k z^{2k+1} / (2k+1)! Δ^k (x^a y^b)     (a + b = ν - 1)
//! ```
//!
//! are harmonic (Δ the planar Laplacian), and there are exactly 2ν+1 of
//! them. Gram–Schmidt in exact arithmetic against the monomial moments gives
//! an orthogonal basis; only the final normalization is done in floating
//! point.

use super::poly::{HarmonicPoly, Poly, RealPoly};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_BASIS_DEGREE: usize = 12;

#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub degree: usize,
    /// Pairwise orthogonal, exact.
    pub orthogonal: Vec<HarmonicPoly>,
    /// `⟨P, P⟩` for each orthogonal element.
    pub norms_sq: Vec<BigRational>,
    /// `P / sqrt(⟨P, P⟩)`: orthonormal in L²(S², μ).
    pub orthonormal: Vec<RealPoly>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.orthogonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orthogonal.is_empty()
    }

    /// Exact coordinates of `p` in the orthogonal basis.
    pub fn coordinates(&self, p: &Poly) -> Vec<BigRational> {
        self.orthogonal.iter().zip(&self.norms_sq).map(|(q, n)| p.sphere_inner(q.poly()) / n).collect()
    }

    /// `sqrt(⟨P_i, P_i⟩)` as floats; converts orthogonal coordinates to
    /// orthonormal ones.
    pub fn norms(&self) -> Vec<f64> {
        self.norms_sq.iter().map(|n| n.to_f64().unwrap().sqrt()).collect()
    }
}

fn factorial(k: u32) -> BigInt {
    (1..=k).map(BigInt::from).product()
}

fn harmonic_extension(a: u32, b: u32, odd: bool, degree: u32) -> Poly {
    let planar = [0usize, 1];
    let mut base = Poly::monomial(vec![a, b, 0], BigRational::one());
    let mut out = Poly::zero(3);
    let mut k = 0u32;
    while !base.is_zero() {
        let zpow = 2 * k + odd as u32;
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let coeff = BigRational::new(sign, factorial(zpow));
        out = out.add(&base.mul(&Poly::monomial(vec![0, 0, zpow], coeff)));
        base = base.laplacian_in(&planar);
        k += 1;
    }
    debug_assert_eq!(out.homogeneous_degree(), Some(degree));
    out
}

fn build(nu: usize) -> HarmonicBasis {
    let deg = nu as u32;
    let mut spanning = Vec::with_capacity(2 * nu + 1);
    for a in (0..=deg).rev() {
        spanning.push(harmonic_extension(a, deg - a, false, deg));
    }
    if deg > 0 {
        for a in (0..deg).rev() {
            spanning.push(harmonic_extension(a, deg - 1 - a, true, deg));
        }
    }

    let mut orthogonal: Vec<Poly> = Vec::with_capacity(spanning.len());
    let mut norms_sq: Vec<BigRational> = Vec::with_capacity(spanning.len());
    for v in spanning {
        let mut w = v.clone();
        for (q, n) in orthogonal.iter().zip(&norms_sq) {
            let proj = v.sphere_inner(q) / n;
            if !proj.is_zero() {
                w = w.sub(&q.scale(&proj));
            }
        }
        let n = w.sphere_inner(&w);
        assert!(!n.is_zero(), "spanning set is linearly independent");
        orthogonal.push(w);
        norms_sq.push(n);
    }
    let orthonormal = orthogonal.iter().zip(&norms_sq).map(|(q, n)| q.to_real().scaled(1.0 / n.to_f64().unwrap().sqrt())).collect();
    HarmonicBasis {
        degree: nu,
        orthogonal: orthogonal.into_iter().map(|p| HarmonicPoly::new_unchecked(p, deg)).collect(),
        norms_sq,
        orthonormal,
    }
}

/// Orthogonal/orthonormal basis of H_ν(S^2), memoized per degree.
pub fn harmonic_basis(nu: usize) -> Result<Arc<HarmonicBasis>> {
    if nu > MAX_BASIS_DEGREE {
        return Err(Error::OutOfRange(format!("basis degree {nu} exceeds {MAX_BASIS_DEGREE}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HarmonicBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().unwrap().get(&nu) {
        return Ok(Arc::clone(b));
    }
    // Built outside the lock; a concurrent duplicate build is harmless.
    let built = Arc::new(build(nu));
    Ok(Arc::clone(cache.lock().unwrap().entry(nu).or_insert(built)))
}
