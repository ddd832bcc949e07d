//! Smallest `|z|` among primitive solutions of `x² + y² + z² = n`.

use super::covering::{least_squares, ExponentFit};
use crate::error::{Error, Result};
use crate::number_theory::{exact_sqrt, factorize, gcd_all, isqrt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinnikResult {
    pub n: u64,
    pub exists: bool,
    pub z_min: Option<u64>,
    pub witness: Option<[u64; 3]>,
}

/// Scans `z = 0, 1, ...` and, for each, `x² + y² = n − z²` with `x >= 1`,
/// `y >= 0`; the first primitive triple wins.
pub fn linnik_min_z(n: u64) -> Result<LinnikResult> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    for z in 0..=isqrt(n) {
        let rest = n - z * z;
        for x in 1..=isqrt(rest) {
            if let Some(y) = exact_sqrt(rest - x * x) {
                if gcd_all(&[x as i64, y as i64, z as i64]) == 1 {
                    return Ok(LinnikResult { n, exists: true, z_min: Some(z), witness: Some([x, y, z]) });
                }
            }
        }
    }
    Ok(LinnikResult { n, exists: false, z_min: None, witness: None })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinnikRow {
    pub l: u64,
    pub n: u64,
    pub z_min: Option<u64>,
    pub witness: Option<[u64; 3]>,
    /// `log z_min / log n`; absent when `z_min` is 0 or no solution exists.
    pub exponent: Option<f64>,
    /// `ℓ` has no prime factor `≡ 3 (mod 4)`, so a solution with `z = 0`
    /// exists.
    pub trivial: bool,
}

pub const MAX_LINNIK_L: u64 = 2001;

/// One row per odd `ℓ` in `3..=l_max`, for `n = ℓ²`.
pub fn linnik_exponent_scan(l_max: u64) -> Result<Vec<LinnikRow>> {
    if !(3..=MAX_LINNIK_L).contains(&l_max) {
        return Err(Error::OutOfRange(format!("l_max {l_max} not in [3, {MAX_LINNIK_L}]")));
    }
    let ls: Vec<u64> = (3..=l_max).step_by(2).collect();
    ls.par_iter()
        .map(|&l| {
            let n = l * l;
            let r = linnik_min_z(n)?;
            let trivial = factorize(l)?.primes().all(|p| p % 4 != 3);
            let exponent = r.z_min.filter(|&z| z > 0).map(|z| (z as f64).ln() / (n as f64).ln());
            Ok(LinnikRow { l, n, z_min: r.z_min, witness: r.witness, exponent, trivial })
        })
        .collect()
}

/// Least-squares slope of `log max z_min` against `log n` over dyadic
/// `ℓ`-ranges `[2^k, 2^{k+1})`, with `n` taken at the maximizing `ℓ`.
pub fn linnik_dyadic_fit(rows: &[LinnikRow]) -> Result<ExponentFit> {
    let mut maxima: Vec<(u64, u64, u64)> = Vec::new(); // (range start, z, n)
    for r in rows {
        let Some(z) = r.z_min else { continue };
        let lo = 1u64 << (63 - r.l.leading_zeros());
        match maxima.last_mut() {
            Some(m) if m.0 == lo => {
                if z > m.1 {
                    *m = (lo, z, r.n);
                }
            }
            _ => maxima.push((lo, z, r.n)),
        }
    }
    let pts: Vec<(f64, f64)> = maxima.iter().filter(|m| m.1 > 0).map(|m| ((m.2 as f64).ln(), (m.1 as f64).ln())).collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two dyadic ranges with z_min > 0".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    least_squares(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: u64) -> Option<u64> {
        let b = isqrt(n) as i64;
        let mut best: Option<u64> = None;
        for x in -b..=b {
            for y in -b..=b {
                for z in -b..=b {
                    if (x * x + y * y + z * z) as u64 == n && gcd_all(&[x, y, z]) == 1 {
                        let a = z.unsigned_abs();
                        best = Some(best.map_or(a, |c| c.min(a)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn examples() {
        let r = linnik_min_z(9).unwrap();
        assert_eq!((r.z_min, r.witness), (Some(1), Some([2, 2, 1])));
        let r = linnik_min_z(25).unwrap();
        assert_eq!((r.z_min, r.witness), (Some(0), Some([3, 4, 0])));
        let r = linnik_min_z(1).unwrap();
        assert_eq!((r.z_min, r.witness), (Some(0), Some([1, 0, 0])));
        // 4 = 2² + 0 + 0 only, imprimitive
        assert!(!linnik_min_z(4).unwrap().exists);
        assert!(!linnik_min_z(7).unwrap().exists);
    }

    #[test]
    fn agrees_with_brute_force() {
        for n in 1..=300 {
            assert_eq!(linnik_min_z(n).unwrap().z_min, brute(n), "n={n}");
        }
    }

    #[test]
    fn scan_rows() {
        let rows = linnik_exponent_scan(21).unwrap();
        let row = |l: u64| rows.iter().find(|r| r.l == l).unwrap().clone();
        assert!(row(5).trivial && row(5).z_min == Some(0) && row(5).exponent.is_none());
        assert_eq!(row(3).z_min, Some(1));
        assert_eq!(row(3).exponent, Some(0.0));
        assert!(!row(21).trivial);
        assert_eq!(row(21).z_min, brute(441));
        assert!(linnik_exponent_scan(2003).is_err());
    }
}
