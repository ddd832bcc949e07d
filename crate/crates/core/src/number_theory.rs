//! Elementary arithmetic: factorization, Möbius and quadratic characters,
//! divisor functions.
//!
//! Everything here is exact on 64-bit integers. Factoring is plain trial
//! division over a 2·3·5 wheel, which is plenty for the sizes used by the
//! rest of the crate (well below 10^12).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }
}

const WHEEL: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];

/// Factors `n` by trial division.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::OutOfRange("factorize(0)".into()));
    }
    if n > i64::MAX as u64 {
        return Err(Error::OutOfRange(format!("factorize({n}) exceeds 2^63 - 1")));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    let mut p = 7u64;
    let mut w = 0;
    while p.saturating_mul(p) <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p += WHEEL[w];
        w = (w + 1) % WHEEL.len();
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { value: n, factors })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut p = 7u64;
    let mut w = 0;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += WHEEL[w];
        w = (w + 1) % WHEEL.len();
    }
    true
}

/// Primes `p <= limit` (sieve of Eratosthenes).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn mobius(n: u64) -> Result<i32> {
    let f = factorize(n)?;
    Ok(mobius_of(&f))
}

pub fn mobius_of(f: &Factorization) -> i32 {
    if !f.is_squarefree() {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The primitive character modulo 4.
pub fn chi4(n: i64) -> i32 {
    match n.rem_euclid(4) {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre_symbol(a: i64, p: i64) -> Result<i32> {
    if p < 3 || p % 2 == 0 || !is_prime(p as u64) {
        return Err(Error::NotOddPrime(p));
    }
    let r = a.rem_euclid(p) as u64;
    if r == 0 {
        return Ok(0);
    }
    let e = pow_mod(r, (p as u64 - 1) / 2, p as u64);
    Ok(if e == 1 { 1 } else { -1 })
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

pub fn divisor_count(n: u64) -> Result<u64> {
    Ok(factorize(n)?.divisor_count())
}

pub fn divisors(n: u64) -> Result<Vec<u64>> {
    Ok(factorize(n)?.divisors())
}

/// Floor of the square root.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Returns `Some(r)` when `n == r * r`.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

/// gcd of the absolute values of all entries (0 for an empty or all-zero slice).
pub fn gcd_all(values: &[i64]) -> i64 {
    values.iter().fold(0, |g, &v| num_integer::gcd(g, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_oracle(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while n > 1 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(factorize(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(9991).unwrap().factors, vec![(97, 1), (103, 1)]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn factorize_agrees_with_naive_division() {
        for n in 1..5000u64 {
            assert_eq!(factorize(n).unwrap().factors, trial_division_oracle(n), "n = {n}");
        }
    }

    #[test]
    fn factorize_large_semiprime() {
        let f = factorize(999_983 * 1_000_003).unwrap();
        assert_eq!(f.factors, vec![(999_983, 1), (1_000_003, 1)]);
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(4).unwrap(), 0);
        assert_eq!(mobius(30).unwrap(), -1);
        assert!(mobius(0).is_err());
    }

    #[test]
    fn mobius_multiplicative_on_coprime_pairs() {
        for a in 1..=200u64 {
            for b in 1..=200u64 {
                if num_integer::gcd(a, b) == 1 {
                    assert_eq!(mobius(a * b).unwrap(), mobius(a).unwrap() * mobius(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn mobius_divisor_sum_vanishes() {
        for n in 2..=10_000u64 {
            let s: i32 = divisors(n).unwrap().iter().map(|&d| mobius(d).unwrap()).sum();
            assert_eq!(s, 0, "n = {n}");
        }
    }

    #[test]
    fn chi4_examples() {
        assert_eq!(chi4(2), 0);
        assert_eq!(chi4(5), 1);
        assert_eq!(chi4(163), -1);
        assert_eq!(chi4(-1), -1);
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(1, 7).unwrap(), 1);
        assert_eq!(legendre_symbol(3, 7).unwrap(), -1);
        assert_eq!(legendre_symbol(7, 7).unwrap(), 0);
        assert_eq!(legendre_symbol(-1, 3).unwrap(), -1);
        assert!(legendre_symbol(1, 2).is_err());
        assert!(legendre_symbol(1, 9).is_err());
    }

    #[test]
    fn legendre_matches_euler_criterion_and_squares() {
        let primes: Vec<i64> = primes_up_to(200).into_iter().skip(1).take(25).map(|p| p as i64).collect();
        assert_eq!(primes.len(), 25);
        for &p in &primes {
            let squares: std::collections::HashSet<i64> = (1..p).map(|x| x * x % p).collect();
            for a in 0..p {
                let l = legendre_symbol(a, p).unwrap();
                let euler = pow_mod(a as u64, (p as u64 - 1) / 2, p as u64);
                let expected = if a == 0 { 0 } else if squares.contains(&a) { 1 } else { -1 };
                assert_eq!(l, expected);
                assert_eq!((l as i64).rem_euclid(p) as u64, euler);
            }
        }
    }

    #[test]
    fn divisor_count_examples() {
        assert_eq!(divisor_count(1).unwrap(), 1);
        assert_eq!(divisor_count(12).unwrap(), 6);
        assert_eq!(divisor_count(9991).unwrap(), 4);
        assert!(divisor_count(0).is_err());
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
        assert_eq!(exact_sqrt(10_000_000_000), Some(100_000));
        assert_eq!(exact_sqrt(10_000_000_001), None);
    }
}
