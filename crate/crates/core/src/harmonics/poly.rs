//! Exact multivariate polynomials over Q, harmonic polynomials, and their
//! floating-point shadows.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub type Exponents = Vec<u32>;

/// Sparse polynomial with exact rational coefficients in a fixed number of
/// variables. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(vec![0; nvars], BigRational::one())
    }

    pub fn monomial(exps: Exponents, coeff: BigRational) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coeff);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Self {
        Self::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), BigRational::from_integer(BigInt::from(*c)))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Exponents, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Degree when every term has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * BigRational::from_integer(BigInt::from(e[i])));
            }
        }
        out
    }

    /// Euclidean Laplacian restricted to the variables in `vars`.
    pub fn laplacian_in(&self, vars: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            for &i in vars {
                if e[i] >= 2 {
                    let mut f = e.clone();
                    f[i] -= 2;
                    out.add_term(f, c * BigRational::from_integer(BigInt::from(e[i] * (e[i] - 1))));
                }
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let all: Vec<usize> = (0..self.nvars).collect();
        self.laplacian_in(&all)
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// `∫_{S^{N-1}} self · other dμ` for the normalized surface measure,
    /// using the exact monomial moments.
    pub fn sphere_inner(&self, other: &Self) -> BigRational {
        let mut acc = BigRational::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let m = sphere_moment(&e);
                if !m.is_zero() {
                    acc += ca * cb * m;
                }
            }
        }
        acc
    }

    pub fn to_real(&self) -> RealPoly {
        RealPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.to_f64().unwrap_or(f64::NAN))).collect(),
        }
    }

    /// Least common denominator of all coefficients.
    pub fn common_denominator(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |l, c| l.lcm(c.denom()))
    }
}

fn double_factorial_odd(k: u32) -> BigInt {
    // (k-1)!! for even k
    let mut acc = BigInt::one();
    let mut j = 1u32;
    while j < k {
        acc *= j;
        j += 2;
    }
    acc
}

/// `∫ Π x_i^{e_i} dμ` over the unit sphere in `R^{e.len()}`: zero if any
/// exponent is odd, otherwise `Π (e_i - 1)!! / (N (N+2) ... (N + |e| - 2))`.
pub fn sphere_moment(e: &[u32]) -> BigRational {
    if e.iter().any(|k| k % 2 == 1) {
        return BigRational::zero();
    }
    let n = e.len() as u32;
    let total: u32 = e.iter().sum();
    let num: BigInt = e.iter().map(|&k| double_factorial_odd(k)).product();
    let mut den = BigInt::one();
    for j in 0..total / 2 {
        den *= n + 2 * j;
    }
    BigRational::new(num, den)
}

/// A homogeneous polynomial annihilated by the Laplacian; represents an
/// element of H_ν on S^d with `d = nvars - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicPoly {
    degree: u32,
    poly: Poly,
}

impl HarmonicPoly {
    /// Checks homogeneity of the given degree and exact harmonicity.
    pub fn new(poly: Poly, degree: u32) -> Result<Self> {
        if let Some(deg) = poly.homogeneous_degree() {
            if deg != degree {
                return Err(Error::OutOfRange(format!("polynomial has degree {deg}, expected {degree}")));
            }
        } else if !poly.is_zero() {
            return Err(Error::OutOfRange("polynomial is not homogeneous".into()));
        }
        if !poly.laplacian().is_zero() {
            return Err(Error::OutOfRange("polynomial is not harmonic".into()));
        }
        Ok(Self { degree, poly })
    }

    pub(crate) fn new_unchecked(poly: Poly, degree: u32) -> Self {
        debug_assert!(poly.laplacian().is_zero());
        Self { degree, poly }
    }

    /// The constant function 1 in `nvars` variables.
    pub fn constant(nvars: usize) -> Self {
        Self { degree: 0, poly: Poly::one(nvars) }
    }

    /// `x^4 - 6 x^2 y^2 + y^4 = Re (x + iy)^4`, a convenient degree-4 test
    /// harmonic on S^2.
    pub fn re_xy4() -> Self {
        Self::new_unchecked(Poly::from_int_terms(3, &[(&[4, 0, 0], 1), (&[2, 2, 0], -6), (&[0, 4, 0], 1)]), 4)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.poly.eval_f64(x)
    }

    pub fn eval_int(&self, m: &[i64]) -> BigRational {
        let x: Vec<BigRational> = m.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
        self.poly.eval_rational(&x)
    }

    pub fn to_real(&self) -> RealPoly {
        self.poly.to_real()
    }

    pub fn integer_evaluator(&self) -> IntEvaluator {
        IntEvaluator::new(&self.poly)
    }

    pub fn to_json(&self) -> HarmonicPolyJson {
        HarmonicPolyJson {
            degree: self.degree,
            terms: self
                .poly
                .terms()
                .iter()
                .map(|(e, c)| TermJson { exponents: e.clone(), numerator: c.numer().to_string(), denominator: c.denom().to_string() })
                .collect(),
        }
    }

    /// Parses the JSON form; `nvars_if_empty` fixes the variable count of the
    /// zero polynomial, which carries no exponent vectors.
    pub fn from_json(json: &HarmonicPolyJson, nvars_if_empty: usize) -> Result<Self> {
        let nvars = json.terms.first().map_or(nvars_if_empty, |t| t.exponents.len());
        let mut terms = Vec::with_capacity(json.terms.len());
        for t in &json.terms {
            if t.exponents.len() != nvars {
                return Err(Error::OutOfRange("inconsistent exponent lengths".into()));
            }
            let num: BigInt = t.numerator.parse().map_err(|_| Error::OutOfRange(format!("bad numerator {}", t.numerator)))?;
            let den: BigInt = t.denominator.parse().map_err(|_| Error::OutOfRange(format!("bad denominator {}", t.denominator)))?;
            if den.is_zero() {
                return Err(Error::OutOfRange("zero denominator".into()));
            }
            terms.push((t.exponents.clone(), BigRational::new(num, den)));
        }
        Self::new(Poly::from_terms(nvars, terms), json.degree)
    }
}

impl fmt::Display for HarmonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let names = ["x", "y", "z", "w", "u", "v"];
        let mut first = true;
        for (e, c) in self.poly.terms() {
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            write!(f, "{}", c.abs())?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*{}", names.get(i).unwrap_or(&"t"))?,
                    _ => write!(f, "*{}^{}", names.get(i).unwrap_or(&"t"), k)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub numerator: String,
    pub denominator: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicPolyJson {
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

/// Polynomial with `f64` coefficients (normalized basis elements,
/// numerically computed eigenfunctions).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPoly {
    pub nvars: usize,
    #[serde(with = "term_list")]
    pub terms: BTreeMap<Exponents, f64>,
}

/// JSON objects need string keys, so terms travel as `[[exponents, coeff], ...]`.
mod term_list {
    use super::Exponents;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(terms: &BTreeMap<Exponents, f64>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<(&Exponents, &f64)> = terms.iter().collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Exponents, f64>, D::Error> {
        let list: Vec<(Exponents, f64)> = Vec::deserialize(d)?;
        Ok(list.into_iter().collect())
    }
}

impl RealPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    pub fn eval_int(&self, m: &[i64]) -> f64 {
        let x: Vec<f64> = m.iter().map(|&v| v as f64).collect();
        self.eval(&x)
    }

    pub fn axpy(&mut self, a: f64, other: &RealPoly) {
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(0.0) += a * c;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), a * c)).collect() }
    }

    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Evaluates an exact polynomial at integer points, returning numerators over
/// a fixed common denominator. Uses checked `i128` arithmetic and falls back
/// to big integers on overflow.
#[derive(Clone, Debug)]
pub struct IntEvaluator {
    denominator: BigInt,
    small: Option<Vec<(Exponents, i128)>>,
    big: Vec<(Exponents, BigInt)>,
}

impl IntEvaluator {
    pub fn new(p: &Poly) -> Self {
        let den = p.common_denominator();
        let big: Vec<(Exponents, BigInt)> =
            p.terms().iter().map(|(e, c)| (e.clone(), (c * BigRational::from_integer(den.clone())).to_integer())).collect();
        let small = big.iter().map(|(e, c)| c.to_i128().map(|v| (e.clone(), v))).collect();
        Self { denominator: den, small, big }
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    fn numerator_small(terms: &[(Exponents, i128)], m: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (e, c) in terms {
            let mut t = *c;
            for (&k, &x) in e.iter().zip(m) {
                if k > 0 {
                    t = t.checked_mul((x as i128).checked_pow(k)?)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    fn numerator_big(&self, m: &[i64]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.big {
            let mut t = c.clone();
            for (&k, &x) in e.iter().zip(m) {
                if k > 0 {
                    t *= num_traits::pow(BigInt::from(x), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// `denominator · P(m)`, exactly.
    pub fn numerator(&self, m: &[i64]) -> BigInt {
        if let Some(terms) = &self.small {
            if let Some(v) = Self::numerator_small(terms, m) {
                return BigInt::from(v);
            }
        }
        self.numerator_big(m)
    }

    pub fn eval(&self, m: &[i64]) -> BigRational {
        BigRational::new(self.numerator(m), self.denominator.clone())
    }

    /// `Σ P(m)` over the given integer vectors, exactly.
    pub fn sum<'a>(&self, points: impl IntoIterator<Item = &'a Vec<i64>>) -> BigRational {
        let mut small_acc: i128 = 0;
        let mut big_acc = BigInt::zero();
        for m in points {
            let v = match &self.small {
                Some(terms) => Self::numerator_small(terms, m),
                None => None,
            };
            match v.and_then(|v| small_acc.checked_add(v)) {
                Some(s) => small_acc = s,
                None => big_acc += self.numerator(m),
            }
        }
        BigRational::new(big_acc + small_acc, self.denominator.clone())
    }
}
