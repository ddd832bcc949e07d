//! Hurwitz quaternions: exact arithmetic, the 24 units, and the elements of
//! reduced norm p.

use crate::error::{Error, Result};
use crate::number_theory::is_prime;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// `(A + Bi + Cj + Dk) / 2` with `A ≡ B ≡ C ≡ D (mod 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HurwitzQuaternion {
    twice: [i64; 4],
}

/// Hamilton product of plain coordinate quadruples.
fn hamilton(x: [i128; 4], y: [i128; 4]) -> [i128; 4] {
    let [a1, b1, c1, d1] = x;
    let [a2, b2, c2, d2] = y;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

fn widen(x: [i64; 4]) -> [i128; 4] {
    x.map(|v| v as i128)
}

impl HurwitzQuaternion {
    /// From twice-coordinates; rejects mixed parity.
    pub fn from_twice(twice: [i64; 4]) -> Result<Self> {
        let parity = twice[0].rem_euclid(2);
        if twice.iter().any(|v| v.rem_euclid(2) != parity) {
            return Err(Error::OutOfRange(format!("twice-coordinates {twice:?} have mixed parity")));
        }
        Ok(Self { twice })
    }

    /// The Lipschitz quaternion `a + bi + cj + dk`.
    pub fn from_integers(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { twice: [2 * a, 2 * b, 2 * c, 2 * d] }
    }

    pub fn one() -> Self {
        Self::from_integers(1, 0, 0, 0)
    }

    pub fn i() -> Self {
        Self::from_integers(0, 1, 0, 0)
    }

    pub fn j() -> Self {
        Self::from_integers(0, 0, 1, 0)
    }

    pub fn k() -> Self {
        Self::from_integers(0, 0, 0, 1)
    }

    pub fn twice(&self) -> [i64; 4] {
        self.twice
    }

    pub fn conj(&self) -> Self {
        let [a, b, c, d] = self.twice;
        Self { twice: [a, -b, -c, -d] }
    }

    /// Reduced trace `x + x̄`, an integer.
    pub fn trace(&self) -> i64 {
        self.twice[0]
    }

    /// Reduced norm `x x̄`, an integer.
    pub fn nr(&self) -> i64 {
        let s: i128 = self.twice.iter().map(|&v| (v as i128) * (v as i128)).sum();
        (s / 4) as i64
    }

    /// Exact product. The result's twice-coordinates are `(XY)/2` where X, Y
    /// are the twice-coordinates of the factors; errors if they leave i64.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let prod = hamilton(widen(self.twice), widen(other.twice));
        let mut out = [0i64; 4];
        for (o, v) in out.iter_mut().zip(prod) {
            debug_assert_eq!(v % 2, 0);
            *o = i64::try_from(v / 2).map_err(|_| Error::OutOfRange("quaternion product overflows i64".into()))?;
        }
        Self::from_twice(out)
    }

    pub fn neg(&self) -> Self {
        Self { twice: self.twice.map(|v| -v) }
    }

    /// Integer matrix `M` with `Z v Z̄ = M v` for pure `v`, where `Z` are the
    /// twice-coordinates; so `z v z̄ = M v / 4`.
    pub fn rotation_matrix_twice(&self) -> [[i64; 3]; 3] {
        let z = widen(self.twice);
        let zc = [z[0], -z[1], -z[2], -z[3]];
        let mut m = [[0i64; 3]; 3];
        for col in 0..3 {
            let mut e = [0i128; 4];
            e[col + 1] = 1;
            let w = hamilton(hamilton(z, e), zc);
            debug_assert_eq!(w[0], 0);
            for row in 0..3 {
                m[row][col] = w[row + 1] as i64;
            }
        }
        m
    }

    /// `z̄ v z` for pure `v` with integer coordinates, returned as four times
    /// the pure part (an integer vector).
    pub fn conjugate_pure_times4(&self, v: [i64; 3]) -> [i128; 3] {
        let z = widen(self.twice);
        let zc = [z[0], -z[1], -z[2], -z[3]];
        let w = hamilton(hamilton(zc, [0, v[0] as i128, v[1] as i128, v[2] as i128]), z);
        [w[1], w[2], w[3]]
    }
}

impl fmt::Display for HurwitzQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.twice;
        if a % 2 == 0 {
            write!(f, "{} + {}i + {}j + {}k", a / 2, b / 2, c / 2, d / 2)
        } else {
            write!(f, "({a} + {b}i + {c}j + {d}k)/2")
        }
    }
}

/// The 24 units of the Hurwitz order: ±1, ±i, ±j, ±k and (±1±i±j±k)/2.
pub fn units() -> Vec<HurwitzQuaternion> {
    let mut out = Vec::with_capacity(24);
    for pos in 0..4 {
        for s in [2i64, -2] {
            let mut t = [0i64; 4];
            t[pos] = s;
            out.push(HurwitzQuaternion { twice: t });
        }
    }
    for mask in 0..16u32 {
        let t = [0, 1, 2, 3].map(|i| if mask >> i & 1 == 1 { -1 } else { 1 });
        out.push(HurwitzQuaternion { twice: t });
    }
    out
}

/// Applies the rotation `v ↦ z v z̄ / nr(z)` to a pure quaternion with
/// rational coordinates.
pub fn rotate(z: &HurwitzQuaternion, v: &[BigRational; 3]) -> Result<[BigRational; 3]> {
    let nr = z.nr();
    if nr <= 0 {
        return Err(Error::OutOfRange("rotation by a zero quaternion".into()));
    }
    let m = z.rotation_matrix_twice();
    let scale = BigRational::from_integer(BigInt::from(4 * nr));
    Ok([0, 1, 2].map(|r| {
        let s: BigRational = (0..3).map(|c| BigRational::from_integer(BigInt::from(m[r][c])) * &v[c]).sum();
        s / &scale
    }))
}

/// All Hurwitz quaternions of reduced norm `p`, with their right cosets
/// modulo the unit group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormPReps {
    pub p: u64,
    /// All `24 (p + 1)` elements, sorted by twice-coordinates.
    pub reps: Vec<HurwitzQuaternion>,
    /// One representative per class `γ O^×` (the lexicographically smallest
    /// `γ u`); there are `p + 1` of them.
    pub classes: Vec<HurwitzQuaternion>,
}

pub const MAX_NORM_PRIME: u64 = 200;

fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || p % 2 == 0 || !is_prime(p) {
        return Err(Error::NotOddPrime(p as i64));
    }
    Ok(())
}

fn enumerate_norm(p: u64) -> NormPReps {
    let target = 4 * p as i64;
    let bound = (target as f64).sqrt() as i64 + 1;
    let mut reps = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            let ab = a * a + b * b;
            if ab > target {
                continue;
            }
            for c in -bound..=bound {
                let abc = ab + c * c;
                if abc > target {
                    continue;
                }
                let rest = target - abc;
                let d = (rest as f64).sqrt().round() as i64;
                if d * d != rest {
                    continue;
                }
                for dd in if d == 0 { vec![0] } else { vec![-d, d] } {
                    if let Ok(q) = HurwitzQuaternion::from_twice([a, b, c, dd]) {
                        reps.push(q);
                    }
                }
            }
        }
    }
    reps.sort();
    let us = units();
    let classes: BTreeSet<HurwitzQuaternion> =
        reps.iter().map(|g| us.iter().map(|u| g.mul(u).expect("small")).min().expect("24 units")).collect();
    NormPReps { p, reps, classes: classes.into_iter().collect() }
}

/// Elements of norm `p` (odd prime, `p <= 200`), cached per `p`.
pub fn norm_reps(p: u64) -> Result<Arc<NormPReps>> {
    check_odd_prime(p)?;
    if p > MAX_NORM_PRIME {
        return Err(Error::OutOfRange(format!("p = {p} exceeds {MAX_NORM_PRIME}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<NormPReps>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&p) {
        return Ok(Arc::clone(r));
    }
    let built = Arc::new(enumerate_norm(p));
    Ok(Arc::clone(cache.lock().unwrap().entry(p).or_insert(built)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::primes_up_to;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn defining_relations() {
        let (i, j, k) = (HurwitzQuaternion::i(), HurwitzQuaternion::j(), HurwitzQuaternion::k());
        assert_eq!(i.mul(&j).unwrap(), k);
        assert_eq!(j.mul(&i).unwrap(), k.neg());
        assert_eq!(i.mul(&i).unwrap(), HurwitzQuaternion::one().neg());
        assert_eq!(HurwitzQuaternion::one().nr(), 1);
        assert_eq!(HurwitzQuaternion::from_twice([1, 1, 1, 1]).unwrap().nr(), 1);
        assert!(HurwitzQuaternion::from_twice([1, 0, 1, 1]).is_err());
    }

    #[test]
    fn unit_group() {
        let us = units();
        assert_eq!(us.len(), 24);
        let set: BTreeSet<_> = us.iter().cloned().collect();
        assert_eq!(set.len(), 24);
        assert!(us.iter().all(|u| u.nr() == 1));
        for a in &us {
            for b in &us {
                assert!(set.contains(&a.mul(b).unwrap()));
            }
        }
    }

    #[test]
    fn norm_rep_counts() {
        assert_eq!(norm_reps(3).unwrap().reps.len(), 96);
        assert_eq!(norm_reps(5).unwrap().reps.len(), 144);
        for p in primes_up_to(100).into_iter().skip(1) {
            let r = norm_reps(p).unwrap();
            assert_eq!(r.reps.len() as u64, 24 * (p + 1), "p = {p}");
            assert!(r.reps.iter().all(|z| z.nr() == p as i64));
            assert_eq!(r.classes.len() as u64, p + 1);
        }
        assert!(norm_reps(2).is_err());
        assert!(norm_reps(9).is_err());
        assert!(norm_reps(211).is_err());
    }

    #[test]
    fn classes_are_right_cosets() {
        let r = norm_reps(7).unwrap();
        let us = units();
        let all: BTreeSet<_> = r.classes.iter().flat_map(|g| us.iter().map(move |u| g.mul(u).unwrap())).collect();
        assert_eq!(all.len(), r.reps.len());
        assert!(r.reps.iter().all(|z| all.contains(z)));
    }

    #[test]
    fn rotate_examples() {
        let v = [q(1), q(2), q(-3)];
        assert_eq!(rotate(&HurwitzQuaternion::one(), &v).unwrap(), v);
        let j = [q(0), q(1), q(0)];
        assert_eq!(rotate(&HurwitzQuaternion::i(), &j).unwrap(), [q(0), q(-1), q(0)]);
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm_and_trace(
            z in prop::array::uniform4(-6i64..=6),
            odd in any::<bool>(),
            v in prop::array::uniform3(-50i64..=50),
            den in 1i64..20,
        ) {
            let twice = if odd { z.map(|c| 2 * c + 1) } else { z.map(|c| 2 * c) };
            let zq = HurwitzQuaternion::from_twice(twice).unwrap();
            prop_assume!(zq.nr() > 0);
            let vr = v.map(|c| BigRational::new(c.into(), den.into()));
            let w = rotate(&zq, &vr).unwrap();
            let norm = |x: &[BigRational; 3]| x.iter().map(|c| c * c).sum::<BigRational>();
            prop_assert_eq!(norm(&w), norm(&vr));
            // rotations are linear maps of pure quaternions, so the result is pure
            let m = zq.rotation_matrix_twice();
            let full = hamilton(hamilton(widen(twice), [0, v[0] as i128, v[1] as i128, v[2] as i128]), widen(zq.conj().twice()));
            prop_assert_eq!(full[0], 0);
            for r in 0..3 {
                prop_assert_eq!(full[r + 1], (0..3).map(|c| m[r][c] as i128 * v[c] as i128).sum::<i128>());
            }
        }
    }
}
