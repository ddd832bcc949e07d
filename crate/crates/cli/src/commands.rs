use crate::{
    svg, CapstatsArgs, CoveringArgs, EigenbasisArgs, EnumerateArgs, Format, Height, HeckeVerifyArgs, LatticeChoice,
    LinnikArgs, PolyChoice, ThetaArgs, VarianceArgs,
};
use anyhow::{bail, ensure, Context as _, Result};
use rsl_core::equidist::{
    covering_exponent_estimate, covering_radius, generic_covering_radius, linnik_dyadic_fit, linnik_exponent_scan,
    random_cap_ratios, summarize_ratios, variance_mc, CoveringReport, ExponentFit, LinnikRow, RatioSummary,
    VarianceEstimate,
};
use rsl_core::harmonics::poly::HarmonicPolyJson;
use rsl_core::harmonics::{cap_measure, harmonic_basis, HarmonicPoly};
use rsl_core::hecke::{hecke_eigenbasis_seeded, hecke_matrix, write_matrix_csv, Eigenbasis};
use rsl_core::lattice::{self, omega_n_count_exact, omega_n_count_mobius, PointCache, PointSet, PointSetLabel};
use rsl_core::number_theory::primes_up_to;
use rsl_core::theta::{
    eichler_verify, hecke_lambda, mobius_inversion_identity_check, CoeffSeries, Scalar, ThetaLattice,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub struct Context {
    cache: Option<PointCache>,
    out: Box<dyn Write>,
}

#[derive(Serialize)]
struct Record<'a, C, R> {
    command: &'a str,
    version: &'a str,
    config: &'a C,
    result: R,
}

impl Context {
    pub fn new(cache_dir: Option<&Path>, output: Option<&Path>) -> Result<Self> {
        let cache = cache_dir.map(PointCache::new).transpose().context("opening cache directory")?;
        let out: Box<dyn Write> = match output {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { cache, out })
    }

    fn emit<C: Serialize, R: Serialize>(&mut self, command: &str, config: &C, result: R) -> Result<()> {
        let rec = Record { command, version: env!("CARGO_PKG_VERSION"), config, result };
        serde_json::to_writer(&mut self.out, &rec)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }

    fn omega_n(&self, n: u64, d: usize) -> Result<PointSet> {
        Ok(match &self.cache {
            Some(c) => c.omega_n(n, d)?,
            None => lattice::omega_n(n, d)?,
        })
    }

    fn omega_t(&self, t: u64, d: usize) -> Result<PointSet> {
        if self.cache.is_none() {
            return Ok(lattice::omega_t(t, d)?);
        }
        let mut points = Vec::new();
        for n in 1..=t {
            points.extend(self.omega_n(n, d)?.points);
        }
        Ok(PointSet { d, points, label: PointSetLabel::HeightUpTo(t) })
    }

    fn point_set(&self, h: &Height, d: usize) -> Result<(PointSet, u64)> {
        match (h.n, h.t) {
            (Some(n), None) => Ok((self.omega_n(n, d)?, n)),
            (None, Some(t)) => Ok((self.omega_t(t, d)?, t)),
            _ => bail!("give exactly one of --n and --T"),
        }
    }
}

fn label_text(label: PointSetLabel) -> String {
    match label {
        PointSetLabel::FixedHeight(n) => format!("Omega_n({n})"),
        PointSetLabel::HeightUpTo(t) => format!("Omega_T({t})"),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EnumerateResult {
    label: String,
    rows: u64,
    /// Sum of `6n ∏(1 − χ₄(p)/p)` (S² only).
    closed_form: Option<u64>,
    mobius: u64,
    check: &'static str,
    files: Vec<String>,
}

pub fn enumerate(mut ctx: Context, a: &EnumerateArgs) -> Result<bool> {
    let (set, _) = ctx.point_set(&a.height, a.d)?;
    let heights: Vec<u64> = match set.label {
        PointSetLabel::FixedHeight(n) => vec![n],
        PointSetLabel::HeightUpTo(t) => (1..=t).collect(),
    };
    let mut mobius = 0u64;
    let mut closed = (a.d == 2).then_some(0u64);
    for &n in &heights {
        mobius += omega_n_count_mobius(n, a.d)?;
        if let Some(c) = closed.as_mut() {
            *c += omega_n_count_exact(n)?;
        }
    }
    let rows = set.len() as u64;
    let ok = rows == mobius && closed.is_none_or(|c| c == rows);

    let mut files = Vec::new();
    match a.format {
        Format::Csv => {
            if let Some(path) = &a.out {
                lattice::write_csv(&set, create(path)?)?;
                files.push(path.display().to_string());
            }
        }
        Format::Bin => {
            let cache = ctx.cache.as_ref().context("--format bin needs --cache-dir or RSL_CACHE")?;
            for &n in &heights {
                let path = cache.path_for(a.d, n);
                if !path.exists() {
                    cache.store(&lattice::omega_n(n, a.d)?)?;
                }
                files.push(path.display().to_string());
            }
        }
    }
    let result = EnumerateResult {
        label: label_text(set.label),
        rows,
        closed_form: closed,
        mobius,
        check: if ok { "ok" } else { "mismatch" },
        files,
    };
    ctx.emit("enumerate", a, result)?;
    Ok(ok)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CapstatsResult {
    label: String,
    num_points: usize,
    #[serde(rename = "R")]
    r: f64,
    cap_measure: f64,
    expected_per_cap: f64,
    mean_ratio: f64,
    summary: RatioSummary,
}

pub fn capstats(mut ctx: Context, a: &CapstatsArgs) -> Result<bool> {
    let (set, x) = ctx.point_set(&a.height, a.d)?;
    ensure!(!set.is_empty(), "{} is empty", label_text(set.label));
    let r = a.r_rule.eval(x);
    let ratios = random_cap_ratios(&set, r, a.samples, a.seed)?;
    if let Some(path) = &a.ratios_csv {
        let mut w = create(path)?;
        writeln!(w, "index,ratio")?;
        for (i, v) in ratios.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        w.flush()?;
    }
    let mu = cap_measure(r, a.d)?;
    let result = CapstatsResult {
        label: label_text(set.label),
        num_points: set.len(),
        r,
        cap_measure: mu,
        expected_per_cap: set.len() as f64 * mu,
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len().max(1) as f64,
        summary: summarize_ratios(&ratios),
    };
    ctx.emit("capstats", a, result)?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VarianceResult {
    #[serde(flatten)]
    estimate: VarianceEstimate,
    /// `variance <= bound + 3 std_error`.
    within_bound: bool,
}

pub fn variance(mut ctx: Context, a: &VarianceArgs) -> Result<bool> {
    let estimate = variance_mc(a.n, a.r_rule.eval(a.n), a.samples, a.seed)?;
    let within_bound = estimate.variance <= estimate.bound + 3.0 * estimate.std_error;
    ctx.emit("variance", a, VarianceResult { estimate, within_bound })?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CoveringEntry {
    #[serde(flatten)]
    report: CoveringReport,
    /// `√(2/n)`, the separation of distinct points of Ω_n.
    repulsion: Option<f64>,
    generic_radius: Option<f64>,
}

#[derive(Serialize)]
struct CoveringResult {
    entries: Vec<CoveringEntry>,
    fit: Option<ExponentFit>,
    fit_note: Option<String>,
}

pub fn covering(mut ctx: Context, a: &CoveringArgs) -> Result<bool> {
    let sets: Vec<Height> = if a.t.is_empty() {
        a.n.iter().map(|&n| Height { n: Some(n), t: None }).collect()
    } else {
        a.t.iter().map(|&t| Height { n: None, t: Some(t) }).collect()
    };
    let mut entries = Vec::with_capacity(sets.len());
    let mut last_points = Vec::new();
    for h in &sets {
        let (set, _) = ctx.point_set(h, 2)?;
        let pts = set.unit_vectors3();
        let report = covering_radius(&pts, a.grid, label_text(set.label))?;
        let generic_radius = a.epsilon.map(|e| generic_covering_radius(&pts, e, a.grid)).transpose()?;
        let repulsion = h.n.map(|n| (2.0 / n as f64).sqrt());
        entries.push(CoveringEntry { report, repulsion, generic_radius });
        last_points = pts;
    }
    let reports: Vec<CoveringReport> = entries.iter().map(|e| e.report.clone()).collect();
    let (fit, fit_note) = match covering_exponent_estimate(&reports, 2) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let (Some(path), Some(last)) = (&a.svg, entries.last()) {
        create(path)?.write_all(svg::orthographic(&last_points, &last.report.label).as_bytes())?;
    }
    ctx.emit("covering", a, CoveringResult { entries, fit, fit_note })?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LinnikResultRecord {
    rows: Vec<LinnikRow>,
    all_solvable: bool,
    dyadic_fit: Option<ExponentFit>,
}

pub fn linnik(mut ctx: Context, a: &LinnikArgs) -> Result<bool> {
    let rows = linnik_exponent_scan(a.lmax)?;
    let all_solvable = rows.iter().all(|r| r.z_min.is_some());
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        writeln!(w, "l,n,z_min,x,y,z,exponent,trivial")?;
        for r in &rows {
            let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
            let [x, y, z] = r.witness.map(|w| w.map(Some)).unwrap_or([None; 3]);
            let e = r.exponent.map(|e| e.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{},{},{},{}", r.l, r.n, opt(r.z_min), opt(x), opt(y), opt(z), e, r.trivial)?;
        }
        w.flush()?;
    }
    let dyadic_fit = linnik_dyadic_fit(&rows).ok();
    ctx.emit("linnik", a, LinnikResultRecord { rows, all_solvable, dyadic_fit })?;
    Ok(all_solvable)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HeckeFailure {
    poly_index: usize,
    n: u64,
    lhs: String,
    rhs: String,
}

#[derive(Serialize)]
struct HeckeVerifyResult {
    p: u64,
    nu: usize,
    #[serde(rename = "N_max")]
    n_max: u64,
    polynomials: Vec<HarmonicPolyJson>,
    checked: u64,
    failures: Vec<HeckeFailure>,
}

pub fn hecke_verify(mut ctx: Context, a: &HeckeVerifyArgs) -> Result<bool> {
    let polys: Vec<HarmonicPoly> = match a.poly {
        PolyChoice::Basis => harmonic_basis(a.nu)?.orthogonal.clone(),
        PolyChoice::ReXy4 => {
            ensure!(a.nu == 4, "re-xy4 has degree 4, not {}", a.nu);
            vec![HarmonicPoly::re_xy4()]
        }
    };
    let mut checked = 0;
    let mut failures = Vec::new();
    for (i, poly) in polys.iter().enumerate() {
        let rep = eichler_verify(a.p, poly, a.nmax)?;
        checked += rep.checked;
        failures.extend(rep.failures.into_iter().map(|f| HeckeFailure { poly_index: i, n: f.n, lhs: f.lhs, rhs: f.rhs }));
    }
    let passed = failures.is_empty();
    let result = HeckeVerifyResult {
        p: a.p,
        nu: a.nu,
        n_max: a.nmax,
        polynomials: polys.iter().map(HarmonicPoly::to_json).collect(),
        checked,
        failures,
    };
    ctx.emit("hecke-verify", a, result)?;
    Ok(passed)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EigenbasisResult {
    #[serde(flatten)]
    basis: Eigenbasis,
    max_residual: f64,
    matrix_files: Vec<String>,
}

pub fn eigenbasis(mut ctx: Context, a: &EigenbasisArgs) -> Result<bool> {
    let basis = hecke_eigenbasis_seeded(a.nu, &a.primes, a.seed)?;
    let max_residual =
        basis.functions.iter().flat_map(|f| f.residuals.values()).fold(0.0f64, |m, &r| m.max(r));
    let mut matrix_files = Vec::new();
    if let Some(dir) = &a.matrix_dir {
        fs::create_dir_all(dir)?;
        for &p in &a.primes {
            let path = dir.join(format!("hecke_p{p}_nu{}.csv", a.nu));
            let mut w = create(&path)?;
            write_matrix_csv(&hecke_matrix(p, a.nu)?, &mut w)?;
            w.flush()?;
            matrix_files.push(path.display().to_string());
        }
    }
    ctx.emit("eigenbasis", a, EigenbasisResult { basis, max_residual, matrix_files })?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ThetaResult {
    lattice: LatticeChoice,
    polynomial: HarmonicPolyJson,
    n_max: u64,
    nonzero: usize,
    /// `n ↦ "numerator/denominator"`.
    values: BTreeMap<u64, String>,
}

#[derive(Serialize)]
struct LiftEntry {
    index: usize,
    block: usize,
    first_coefficient_vanishes: bool,
    lambda: BTreeMap<u64, f64>,
    multiplicativity_15: Option<f64>,
    deligne_max: Option<f64>,
    mobius_residual_max: Option<f64>,
}

pub const MULTIPLICATIVITY_TOL: f64 = 1e-8;
pub const MOBIUS_TOL: f64 = 1e-8;

pub fn theta(mut ctx: Context, a: &ThetaArgs) -> Result<bool> {
    if a.lift {
        return theta_lift(ctx, a);
    }
    let basis = harmonic_basis(a.nu)?;
    let poly = basis.orthogonal.get(a.index).with_context(|| format!("H_{} has dimension {}", a.nu, basis.len()))?;
    let lattice = match a.lattice {
        LatticeChoice::Z3 => ThetaLattice::Z3,
        LatticeChoice::Lambda => ThetaLattice::Lambda,
    };
    let series = CoeffSeries::compute(poly, lattice, a.nmax, format!("nu{}_b{}", a.nu, a.index))?;
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        series.write_csv(&mut w)?;
        w.flush()?;
    }
    let result = ThetaResult {
        lattice: a.lattice,
        polynomial: poly.to_json(),
        n_max: a.nmax,
        nonzero: series.values.values().filter(|v| !Scalar::is_zero(*v)).count(),
        values: series.values.iter().map(|(n, v)| (*n, v.to_string())).collect(),
    };
    ctx.emit("theta", a, result)?;
    Ok(true)
}

fn theta_lift(mut ctx: Context, a: &ThetaArgs) -> Result<bool> {
    let basis = hecke_eigenbasis_seeded(a.nu, &a.primes, a.seed)?;
    let odd_primes: Vec<u64> = primes_up_to(100).into_iter().filter(|&p| p > 2).collect();
    let n_top = a.nmax.min(300);
    let mut entries = Vec::new();
    let mut ok = true;
    for (index, f) in basis.functions.iter().enumerate() {
        let mut e = LiftEntry {
            index,
            block: f.block,
            first_coefficient_vanishes: false,
            lambda: BTreeMap::new(),
            multiplicativity_15: None,
            deligne_max: None,
            mobius_residual_max: None,
        };
        match hecke_lambda(&f.poly, 1) {
            Err(rsl_core::Error::VanishingFirstCoefficient) => e.first_coefficient_vanishes = true,
            Err(err) => return Err(err.into()),
            Ok(_) => {
                for &p in &odd_primes {
                    e.lambda.insert(p, hecke_lambda(&f.poly, p)?);
                }
                let l15 = hecke_lambda(&f.poly, 15)?;
                let mult = (l15 - e.lambda[&3] * e.lambda[&5]).abs();
                let deligne = e.lambda.values().fold(0.0f64, |m, v| m.max(v.abs()));
                let mut mobius = 0.0f64;
                for n in (1..=n_top).step_by(2) {
                    mobius = mobius.max(mobius_inversion_identity_check(&f.poly, n)?);
                }
                ok &= mult < MULTIPLICATIVITY_TOL && deligne <= 2.0 && mobius < MOBIUS_TOL;
                e.multiplicativity_15 = Some(mult);
                e.deligne_max = Some(deligne);
                e.mobius_residual_max = Some(mobius);
            }
        }
        entries.push(e);
    }
    ctx.emit("theta", a, entries)?;
    Ok(ok)
}
