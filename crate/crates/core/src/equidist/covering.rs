//! Covering radius on S² from a Fibonacci grid, with a latitude-band
//! nearest-neighbor index.

use crate::error::{Error, Result};
use crate::harmonics::{cap_measure, fibonacci_sphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

pub const MIN_GRID: usize = 1000;

struct Band {
    theta_lo: f64,
    theta_hi: f64,
    /// Smallest `sin θ` over the band.
    r_min: f64,
    /// `(azimuth, point)`, sorted by azimuth.
    pts: Vec<(f64, [f64; 3])>,
}

/// Points bucketed by polar angle, each bucket sorted by azimuth.
pub struct BandIndex {
    bands: Vec<Band>,
}

fn polar(p: &[f64; 3]) -> (f64, f64) {
    let theta = p[2].clamp(-1.0, 1.0).acos();
    let phi = p[1].atan2(p[0]);
    (theta, phi)
}

fn chord_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

impl BandIndex {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let nbands = ((points.len() as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 2048);
        let width = PI / nbands as f64;
        let mut bands: Vec<Band> = (0..nbands)
            .map(|b| {
                let lo = b as f64 * width;
                let hi = lo + width;
                Band { theta_lo: lo, theta_hi: hi, r_min: lo.sin().min(hi.sin()).max(0.0), pts: Vec::new() }
            })
            .collect();
        for p in points {
            let (theta, phi) = polar(p);
            let b = ((theta / width) as usize).min(nbands - 1);
            bands[b].pts.push((phi, *p));
        }
        for band in &mut bands {
            band.pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            // polar angles are recomputed from rounded coordinates; widen
            // the band bounds to what was actually stored
            for (_, p) in &band.pts {
                let (t, _) = polar(p);
                band.theta_lo = band.theta_lo.min(t);
                band.theta_hi = band.theta_hi.max(t);
            }
            band.r_min = if band.theta_lo <= PI / 2.0 && band.theta_hi >= PI / 2.0 {
                band.theta_lo.sin().min(band.theta_hi.sin())
            } else {
                band.theta_lo.sin().min(band.theta_hi.sin()).max(0.0)
            };
        }
        Self { bands }
    }

    /// Squared chord distances to the nearest and second-nearest indexed
    /// points (infinite when absent).
    pub fn nearest_two(&self, q: &[f64; 3]) -> (f64, f64) {
        let (tq, pq) = polar(q);
        let rq = tq.sin();
        let nb = self.bands.len();
        let start = ((tq / (PI / nb as f64)) as usize).min(nb - 1);
        let mut best = (f64::INFINITY, f64::INFINITY);
        let mut push = |d: f64, best: &mut (f64, f64)| {
            if d < best.0 {
                *best = (d, best.0);
            } else if d < best.1 {
                best.1 = d;
            }
        };
        let lower_bound = |band: &Band| -> f64 {
            let gap = (band.theta_lo - tq).max(tq - band.theta_hi).max(0.0);
            let c = 2.0 * (gap / 2.0).sin();
            c * c
        };
        let mut offset = 0usize;
        loop {
            let mut any = false;
            for b in [start.checked_sub(offset), if offset == 0 { None } else { Some(start + offset) }].into_iter().flatten() {
                if b >= nb {
                    continue;
                }
                any = true;
                let band = &self.bands[b];
                if band.pts.is_empty() || lower_bound(band) >= best.1 {
                    continue;
                }
                scan_band(band, q, pq, rq, &mut best, &mut push);
            }
            if !any {
                break;
            }
            // every remaining band is at least this far away in θ
            let gap = offset as f64 * PI / nb as f64 - PI / nb as f64;
            if gap > 0.0 {
                let c = 2.0 * (gap.min(PI) / 2.0).sin();
                if c * c >= best.1 {
                    break;
                }
            }
            offset += 1;
        }
        best
    }
}

fn scan_band(band: &Band, q: &[f64; 3], pq: f64, rq: f64, best: &mut (f64, f64), push: &mut impl FnMut(f64, &mut (f64, f64))) {
    let len = band.pts.len();
    let pos = band.pts.partition_point(|(phi, _)| *phi < pq);
    let scale = 2.0 * rq * band.r_min;
    let bound = |phi: f64| -> f64 {
        let mut dphi = (phi - pq).abs();
        if dphi > PI {
            dphi = 2.0 * PI - dphi;
        }
        scale * (1.0 - dphi.cos())
    };
    let mut right_open = true;
    let mut left_open = true;
    let mut visited = 0usize;
    let mut step = 0usize;
    while visited < len && (right_open || left_open) {
        if right_open {
            let i = (pos + step) % len;
            let (phi, p) = &band.pts[i];
            if bound(*phi) >= best.1 && step > 0 {
                right_open = false;
            } else {
                push(chord_sq(q, p), best);
                visited += 1;
            }
        }
        if left_open && visited < len {
            let i = (pos + len - 1 - step % len) % len;
            let (phi, p) = &band.pts[i];
            if bound(*phi) >= best.1 && step > 0 {
                left_open = false;
            } else {
                push(chord_sq(q, p), best);
                visited += 1;
            }
        }
        step += 1;
        if step >= len {
            break;
        }
    }
}

/// A Fibonacci grid with its mesh bound (largest nearest-neighbor spacing).
pub struct Grid {
    pub points: Vec<[f64; 3]>,
    pub mesh: f64,
}

/// Grid of `k` points, memoized.
pub fn grid(k: usize) -> Arc<Grid> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Grid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().unwrap().get(&k) {
        return Arc::clone(g);
    }
    let points = fibonacci_sphere(k);
    let index = BandIndex::new(&points);
    let mesh = points.par_iter().map(|p| index.nearest_two(p).1.sqrt()).reduce(|| 0.0, f64::max);
    let built = Arc::new(Grid { points, mesh });
    Arc::clone(cache.lock().unwrap().entry(k).or_insert(built))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CoveringMethod {
    Grid { k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub label: String,
    pub num_points: usize,
    /// Largest grid-to-set distance: a lower bound on the true radius.
    pub covering_radius: f64,
    pub method: CoveringMethod,
    /// The true radius is at most `covering_radius + resolution_error_bound`.
    pub resolution_error_bound: f64,
}

fn grid_distances(points: &[[f64; 3]], k: usize) -> Result<(Arc<Grid>, Vec<f64>)> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if k < MIN_GRID {
        return Err(Error::OutOfRange(format!("grid size {k} below {MIN_GRID}")));
    }
    let g = grid(k);
    let index = BandIndex::new(points);
    let dists = g.points.par_iter().map(|q| index.nearest_two(q).0.sqrt().min(2.0)).collect();
    Ok((g, dists))
}

pub fn covering_radius(points: &[[f64; 3]], k: usize, label: impl Into<String>) -> Result<CoveringReport> {
    let (g, dists) = grid_distances(points, k)?;
    Ok(CoveringReport {
        label: label.into(),
        num_points: points.len(),
        covering_radius: dists.iter().cloned().fold(0.0, f64::max),
        method: CoveringMethod::Grid { k },
        resolution_error_bound: g.mesh,
    })
}

/// Fraction of grid points farther than `r` from every point.
pub fn uncovered_fraction(points: &[[f64; 3]], r: f64, k: usize) -> Result<f64> {
    let (_, dists) = grid_distances(points, k)?;
    Ok(dists.iter().filter(|&&d| d > r).count() as f64 / k as f64)
}

/// Least `R` (to 1e-4) whose closed caps leave at most a fraction `epsilon`
/// of the grid uncovered.
pub fn generic_covering_radius(points: &[[f64; 3]], epsilon: f64, k: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} not in (0, 1)")));
    }
    let (_, dists) = grid_distances(points, k)?;
    let frac = |r: f64| dists.iter().filter(|&&d| d > r).count() as f64 / k as f64;
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if frac(mid) <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub entries: usize,
}

/// Ordinary least squares `y ≈ a x + b`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 * n.max(1.0) {
        return Err(Error::DegenerateFit("abscissae have zero variance".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    Ok(ExponentFit { exponent: a, intercept: b, residual: (rss / n).sqrt(), entries: xs.len() })
}

/// Slope of `log |X_N|` against `−log μ(C_{R_N})` on S^d.
pub fn covering_exponent_estimate(series: &[CoveringReport], d: usize) -> Result<ExponentFit> {
    if series.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 entries, got {}", series.len())));
    }
    if series.windows(2).any(|w| w[1].num_points <= w[0].num_points) {
        return Err(Error::DegenerateFit("sizes must increase".into()));
    }
    let xs: Vec<f64> = series.iter().map(|s| cap_measure(s.covering_radius, d).map(|m| -m.ln())).collect::<Result<_>>()?;
    let ys: Vec<f64> = series.iter().map(|s| (s.num_points as f64).ln()).collect();
    least_squares(&xs, &ys)
}
