//! Integer representations by sums of squares and the rational point sets
//! Ω_n (height exactly n) and Ω_T (height at most T) on S^d.

use crate::error::{Error, Result};
use crate::number_theory::{self, chi4, exact_sqrt, factorize, gcd_all, isqrt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 6;

/// A rational point `m / n` on the unit sphere, stored in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalSpherePoint {
    pub m: Vec<i64>,
    pub n: u64,
}

impl RationalSpherePoint {
    /// Checks `|m|^2 = n^2` and `gcd(m, n) = 1`.
    pub fn is_valid(&self) -> bool {
        let n = self.n as i128;
        let sq: i128 = self.m.iter().map(|&x| (x as i128) * (x as i128)).sum();
        let mut all = self.m.clone();
        all.push(self.n as i64);
        self.n > 0 && sq == n * n && gcd_all(&all) == 1
    }

    pub fn to_unit(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.m.iter().map(|&x| x as f64 / n).collect()
    }

    pub fn to_unit3(&self) -> [f64; 3] {
        let n = self.n as f64;
        [self.m[0] as f64 / n, self.m[1] as f64 / n, self.m[2] as f64 / n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointSetLabel {
    FixedHeight(u64),
    HeightUpTo(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub d: usize,
    pub points: Vec<RationalSpherePoint>,
    pub label: PointSetLabel,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn unit_vectors(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(RationalSpherePoint::to_unit).collect()
    }

    /// Unit vectors for points on S^2; panics for other dimensions.
    pub fn unit_vectors3(&self) -> Vec<[f64; 3]> {
        assert_eq!(self.d, 2, "unit_vectors3 requires points on S^2");
        self.points.iter().map(RationalSpherePoint::to_unit3).collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Dimension(dim))
    }
}

fn check_k(k: u64, dim: usize) -> Result<()> {
    let limit = if dim == 3 { 10_000_000_000 } else { 100_000_000 };
    if k > limit {
        return Err(Error::OutOfRange(format!("k = {k} exceeds {limit} for dimension {dim}")));
    }
    Ok(())
}

/// Appends every solution of `x_1^2 + ... + x_dim^2 = k` to `out`, ordered
/// lexicographically on `(x_dim, ..., x_1)`. `suffix` holds the coordinates
/// already fixed above `dim`, outermost first.
fn push_reps(k: u64, dim: usize, suffix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    match dim {
        0 => {
            if k == 0 {
                let mut v = suffix.clone();
                v.reverse();
                out.push(v);
            }
        }
        1 => {
            if let Some(r) = exact_sqrt(k) {
                let r = r as i64;
                let choices: &[i64] = if r == 0 { &[0] } else { &[-r, r] };
                for &x in choices {
                    suffix.push(x);
                    push_reps(0, 0, suffix, out);
                    suffix.pop();
                }
            }
        }
        _ => {
            let s = isqrt(k) as i64;
            for x in -s..=s {
                suffix.push(x);
                push_reps(k - (x * x) as u64, dim - 1, suffix, out);
                suffix.pop();
            }
        }
    }
}

/// All `v ∈ Z^dim` with `|v|^2 = k`, each exactly once, ordered
/// lexicographically on `(v_dim, ..., v_1)`.
pub fn representations(k: u64, dim: usize) -> Result<Vec<Vec<i64>>> {
    check_dim(dim)?;
    check_k(k, dim)?;
    let s = isqrt(k) as i64;
    // Top-level slices are independent; collecting an indexed parallel
    // iterator keeps them in order.
    let slices: Vec<Vec<Vec<i64>>> = (-s..=s)
        .into_par_iter()
        .map(|top| {
            let mut out = Vec::new();
            let mut suffix = vec![top];
            push_reps(k - (top * top) as u64, dim - 1, &mut suffix, &mut out);
            out
        })
        .collect();
    Ok(slices.into_iter().flatten().collect())
}

/// Number of ordered pairs `(a, b)` with `a^2 + b^2 = k`.
pub fn r2(k: u64) -> u64 {
    let s = isqrt(k);
    let mut count = 0u64;
    for a in 0..=s {
        if let Some(b) = exact_sqrt(k - a * a) {
            count += match (a, b) {
                (0, 0) => 1,
                (0, _) | (_, 0) => 2,
                _ => 4,
            };
        }
    }
    count
}

/// Jacobi's four-square count `8 * sum_{d | k, 4 ∤ d} d`.
fn r4(k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    let f = factorize(k).expect("k > 0");
    8 * f.divisors().into_iter().filter(|d| d % 4 != 0).sum::<u64>()
}

fn r_count_rec(k: u64, dim: usize) -> u64 {
    match dim {
        2 => r2(k),
        4 => r4(k),
        _ => {
            let s = isqrt(k);
            let mut total = r_count_rec(k, dim - 1);
            for x in 1..=s {
                total += 2 * r_count_rec(k - x * x, dim - 1);
            }
            total
        }
    }
}

/// Number of representations of `k` as an ordered sum of `dim` squares,
/// without materializing them.
pub fn r_count(k: u64, dim: usize) -> Result<u64> {
    check_dim(dim)?;
    check_k(k, dim)?;
    if dim == 3 {
        let s = isqrt(k);
        let tail: u64 = (1..=s).into_par_iter().map(|x| 2 * r2(k - x * x)).sum();
        return Ok(r2(k) + tail);
    }
    Ok(r_count_rec(k, dim))
}

/// Ω_n on S^d: primitive integer vectors of length n in Z^{d+1}.
pub fn omega_n(n: u64, d: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::OutOfRange("height must be positive".into()));
    }
    let dim = d + 1;
    let k = n.checked_mul(n).ok_or_else(|| Error::OutOfRange(format!("n = {n}")))?;
    let ni = n as i64;
    let points: Vec<RationalSpherePoint> = representations(k, dim)?
        .into_iter()
        .filter(|m| m.iter().fold(ni, |g, &x| number_theory::gcd(g, x)) == 1)
        .map(|m| RationalSpherePoint { m, n })
        .collect();
    debug_assert!(points.iter().all(RationalSpherePoint::is_valid));
    Ok(PointSet { d, points, label: PointSetLabel::FixedHeight(n) })
}

/// Closed form for |Ω_n| on S^2: `6 n prod_{p | n} (1 - chi4(p)/p)` for odd
/// n, zero for even n.
pub fn omega_n_count_exact(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::OutOfRange("height must be positive".into()));
    }
    if n % 2 == 0 {
        return Ok(0);
    }
    let f = factorize(n)?;
    let mut count = 6u64;
    for &(p, e) in &f.factors {
        let factor = (p as i64 - chi4(p as i64) as i64) as u64;
        count *= p.pow(e - 1) * factor;
    }
    Ok(count)
}

/// Möbius route to |Ω_n|: `sum_{δ | n} μ(δ) r_{d+1}(n^2 / δ^2)`.
pub fn omega_n_count_mobius(n: u64, d: usize) -> Result<u64> {
    let f = factorize(n)?;
    let mut total = 0i64;
    for delta in f.divisors() {
        let mu = number_theory::mobius(delta)?;
        if mu != 0 {
            let q = n / delta;
            total += mu as i64 * r_count(q * q, d + 1)? as i64;
        }
    }
    Ok(total as u64)
}

/// Ω_T on S^d: all rational points of height at most T, grouped by height.
pub fn omega_t(t: u64, d: usize) -> Result<PointSet> {
    if t == 0 {
        return Err(Error::OutOfRange("T must be positive".into()));
    }
    let per_height: Vec<Vec<RationalSpherePoint>> = (1..=t)
        .into_par_iter()
        .map(|n| omega_n(n, d).map(|s| s.points))
        .collect::<Result<_>>()?;
    Ok(PointSet { d, points: per_height.into_iter().flatten().collect(), label: PointSetLabel::HeightUpTo(t) })
}

// ---------------------------------------------------------------------------
// Serialization

/// Writes `m1, ..., m_{d+1}, n` rows with a header line.
pub fn write_csv<W: Write>(set: &PointSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=set.d + 1).map(|i| format!("m{i}")).collect();
    header.push("n".into());
    w.write_record(&header)?;
    for p in &set.points {
        let mut row: Vec<String> = p.m.iter().map(|x| x.to_string()).collect();
        row.push(p.n.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R, label: PointSetLabel) -> Result<PointSet> {
    let mut r = csv::Reader::from_reader(reader);
    let width = r.headers()?.len();
    if width < MIN_DIM + 1 {
        return Err(Error::Dimension(width.saturating_sub(1)));
    }
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<i64> = rec
            .iter()
            .map(|s| s.trim().parse::<i64>().map_err(|e| Error::Cache(format!("bad integer {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        let n = *vals.last().expect("non-empty record");
        if n <= 0 {
            return Err(Error::Cache(format!("non-positive height {n}")));
        }
        points.push(RationalSpherePoint { m: vals[..vals.len() - 1].to_vec(), n: n as u64 });
    }
    Ok(PointSet { d: width - 2, points, label })
}

const CACHE_MAGIC: &[u8; 4] = b"RSLP";
const CACHE_VERSION: u32 = 1;

/// On-disk cache of Ω_n, one little-endian binary file per `(d, n)`:
/// magic `RSLP`, u32 version, u32 d, u64 n, u64 count, then `count * (d+1)`
/// i64 coordinates.
#[derive(Debug, Clone)]
pub struct PointCache {
    dir: PathBuf,
}

impl PointCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn path_for(&self, d: usize, n: u64) -> PathBuf {
        self.dir.join(format!("omega_d{d}_n{n}.bin"))
    }

    pub fn store(&self, set: &PointSet) -> Result<PathBuf> {
        let PointSetLabel::FixedHeight(n) = set.label else {
            return Err(Error::Cache("only fixed-height sets are cached".into()));
        };
        let path = self.path_for(set.d, n);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(set.d as u32).to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&(set.points.len() as u64).to_le_bytes())?;
        for p in &set.points {
            for &x in &p.m {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(path)
    }

    pub fn load(&self, d: usize, n: u64) -> Result<Option<PointSet>> {
        let path = self.path_for(d, n);
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path)?;
        decode_cache(&bytes, d, n, &path).map(Some)
    }

    pub fn omega_n(&self, n: u64, d: usize) -> Result<PointSet> {
        if let Some(set) = self.load(d, n)? {
            return Ok(set);
        }
        let set = omega_n(n, d)?;
        self.store(&set)?;
        Ok(set)
    }
}

fn decode_cache(bytes: &[u8], d: usize, n: u64, path: &Path) -> Result<PointSet> {
    let bad = |msg: &str| Error::Cache(format!("{}: {msg}", path.display()));
    let take_u32 = |at: usize| -> Option<u32> { bytes.get(at..at + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap())) };
    let take_u64 = |at: usize| -> Option<u64> { bytes.get(at..at + 8).map(|b| u64::from_le_bytes(b.try_into().unwrap())) };
    if bytes.get(0..4) != Some(CACHE_MAGIC.as_slice()) {
        return Err(bad("bad magic"));
    }
    if take_u32(4) != Some(CACHE_VERSION) {
        return Err(bad("unsupported version"));
    }
    if take_u32(8) != Some(d as u32) || take_u64(12) != Some(n) {
        return Err(bad("key mismatch"));
    }
    let count = take_u64(20).ok_or_else(|| bad("truncated header"))? as usize;
    let dim = d + 1;
    let body = &bytes[28..];
    if body.len() != count * dim * 8 {
        return Err(bad("truncated body"));
    }
    let points = body
        .chunks_exact(dim * 8)
        .map(|chunk| RationalSpherePoint {
            m: chunk.chunks_exact(8).map(|b| i64::from_le_bytes(b.try_into().unwrap())).collect(),
            n,
        })
        .collect();
    Ok(PointSet { d, points, label: PointSetLabel::FixedHeight(n) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn brute_force(k: u64, dim: usize) -> HashSet<Vec<i64>> {
        let s = isqrt(k) as i64;
        let mut out = HashSet::new();
        let mut v = vec![-s; dim];
        loop {
            if v.iter().map(|x| (x * x) as u64).sum::<u64>() == k {
                out.insert(v.clone());
            }
            let mut i = 0;
            loop {
                if i == dim {
                    return out;
                }
                if v[i] < s {
                    v[i] += 1;
                    break;
                }
                v[i] = -s;
                i += 1;
            }
        }
    }

    #[test]
    fn representation_examples() {
        let one = representations(1, 3).unwrap();
        assert_eq!(one.len(), 6);
        let three = representations(3, 3).unwrap();
        assert_eq!(three.len(), 8);
        assert!(three.iter().all(|v| v.iter().all(|x| x.abs() == 1)));
        assert_eq!(representations(9, 3).unwrap().len(), 30);
    }

    #[test]
    fn representations_match_brute_force() {
        for dim in 3..=5 {
            for k in 0..=40 {
                let got = representations(k, dim).unwrap();
                let set: HashSet<_> = got.iter().cloned().collect();
                assert_eq!(set.len(), got.len(), "duplicates for k={k}");
                assert_eq!(set, brute_force(k, dim), "k={k} dim={dim}");
            }
        }
    }

    #[test]
    fn representations_are_lexicographic_on_reversed_tuple() {
        let reps = representations(50, 3).unwrap();
        let keys: Vec<Vec<i64>> = reps.iter().map(|v| v.iter().rev().cloned().collect()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn representations_closed_under_signs_and_permutations() {
        for k in 0..=100 {
            let reps: HashSet<Vec<i64>> = representations(k, 3).unwrap().into_iter().collect();
            for v in &reps {
                for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    for signs in 0..8 {
                        let w: Vec<i64> = (0..3)
                            .map(|i| if signs >> i & 1 == 1 { -v[perm[i]] } else { v[perm[i]] })
                            .collect();
                        assert!(reps.contains(&w));
                    }
                }
            }
        }
    }

    #[test]
    fn r_count_examples() {
        assert_eq!(r_count(2, 3).unwrap(), 12);
        assert_eq!(r_count(7, 3).unwrap(), 0);
        assert_eq!(r_count(1, 4).unwrap(), 8);
    }

    #[test]
    fn r_count_matches_enumeration() {
        for dim in 3..=6 {
            for k in 0..=60 {
                assert_eq!(r_count(k, dim).unwrap() as usize, representations(k, dim).unwrap().len(), "k={k} dim={dim}");
            }
        }
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(representations(4, 2).is_err());
        assert!(r_count(4, 7).is_err());
    }

    #[test]
    fn omega_n_examples() {
        assert!(omega_n(2, 2).unwrap().is_empty());
        assert_eq!(omega_n(3, 2).unwrap().len(), 24);
        assert_eq!(omega_n(1, 2).unwrap().len(), 6);
        assert_eq!(omega_n_count_exact(101).unwrap(), 600);
        assert_eq!(omega_n_count_exact(163).unwrap(), 984);
        assert_eq!(omega_n_count_exact(2).unwrap(), 0);
    }

    #[test]
    fn omega_n_matches_closed_form_and_mobius() {
        for n in 1..=101u64 {
            let set = omega_n(n, 2).unwrap();
            assert!(set.points.iter().all(RationalSpherePoint::is_valid));
            assert_eq!(set.len() as u64, omega_n_count_mobius(n, 2).unwrap(), "n = {n}");
            assert_eq!(set.len() as u64, omega_n_count_exact(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn omega_n_higher_dimensions_match_mobius() {
        for d in 3..=4 {
            for n in 1..=15u64 {
                assert_eq!(omega_n(n, d).unwrap().len() as u64, omega_n_count_mobius(n, d).unwrap());
            }
        }
    }

    #[test]
    fn omega_t_examples() {
        assert_eq!(omega_t(1, 2).unwrap().len(), 6);
        assert_eq!(omega_t(3, 2).unwrap().len(), 30);
        let expected: u64 = (1..=20).map(|n| omega_n_count_exact(n).unwrap()).sum();
        assert_eq!(omega_t(20, 2).unwrap().len() as u64, expected);
        let set = omega_t(20, 2).unwrap();
        let distinct: HashSet<_> = set.points.iter().collect();
        assert_eq!(distinct.len(), set.len());
    }

    #[test]
    fn csv_round_trip_and_cache() {
        let set = omega_n(5, 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("m1,m2,m3,n\n"));
        let back = read_csv(buf.as_slice(), set.label).unwrap();
        assert_eq!(back, set);

        let dir = tempfile::tempdir().unwrap();
        let cache = PointCache::new(dir.path()).unwrap();
        assert!(cache.load(2, 5).unwrap().is_none());
        let first = cache.omega_n(5, 2).unwrap();
        assert!(cache.path_for(2, 5).exists());
        assert_eq!(cache.load(2, 5).unwrap().unwrap(), first);
        assert!(cache.load(3, 5).unwrap().is_none());
    }

    #[test]
    fn corrupted_cache_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PointCache::new(dir.path()).unwrap();
        cache.omega_n(7, 2).unwrap();
        let path = cache.path_for(2, 7);
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, bytes).unwrap();
        assert!(matches!(cache.load(2, 7), Err(Error::Cache(_))));
    }
}
