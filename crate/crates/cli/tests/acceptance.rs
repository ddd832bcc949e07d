//! Acceptance criteria, one line each.
//!
//! Runs as a plain binary so every verdict is printed regardless of output
//! capture; exits nonzero if any criterion fails.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rsl_core::equidist::{
    covering::least_squares, covering_exponent_estimate, covering_radius, linnik_dyadic_fit, linnik_exponent_scan,
    linnik_min_z, random_cap_ratios, summarize_ratios, variance_mc, CoveringMethod, CoveringReport,
};
use rsl_core::harmonics::{area_ratio, cap_gegenbauer_coeffs, cap_measure, harmonic_basis, HarmonicPoly};
use rsl_core::hecke::{hecke_eigenbasis, hecke_matrix, rational_matmul};
use rsl_core::lattice::{omega_n, omega_n_count_exact, omega_n_count_mobius, omega_t};
use rsl_core::number_theory::{is_prime, primes_up_to};
use rsl_core::quaternion::norm_reps;
use rsl_core::theta::{
    eichler_verify, hecke_lambda, lambda_points, mobius_inversion_identity_check, neighbor_count,
    neighbor_count_lemma,
};
use rsl_core::Error;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

/// Collects sub-check failures so one line can report all of them.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn within(&mut self, elapsed: Duration, limit: Duration, what: &str) {
        self.check(elapsed < limit, format!("{what} took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()));
    }

    fn verdict(self) -> Verdict {
        let notes = self.notes.join("; ");
        if self.failed.is_empty() {
            Ok(notes)
        } else {
            Err(format!("{} | {notes}", self.failed.join("; ")))
        }
    }
}

fn exact_counting() -> Verdict {
    let mut c = Checks::default();
    let start = Instant::now();
    let mut heights = 0;
    for n in (1..=501u64).step_by(2) {
        let enumerated = omega_n(n, 2).unwrap().len() as u64;
        let closed = omega_n_count_exact(n).unwrap();
        let mobius = omega_n_count_mobius(n, 2).unwrap();
        c.check(enumerated == closed && closed == mobius, format!("n={n}: {enumerated} vs {closed} vs {mobius}"));
        heights += 1;
    }
    c.within(start.elapsed(), Duration::from_secs(60), "enumeration");
    c.check(omega_n(101, 2).unwrap().len() == 600, "|Ω_101| != 600");
    c.check(omega_n(163, 2).unwrap().len() == 984, "|Ω_163| != 984");
    c.note(format!("{heights} odd heights agree, |Ω_101|=600, |Ω_163|=984"));
    c.verdict()
}

fn eichler_relation() -> Verdict {
    let mut c = Checks::default();
    let start = Instant::now();
    let mut checked = 0;
    for (p, nu) in [(3u64, 4usize), (5, 4), (7, 4), (3, 6)] {
        for (i, poly) in harmonic_basis(nu).unwrap().orthogonal.iter().enumerate() {
            let rep = eichler_verify(p, poly, 300).unwrap();
            checked += rep.checked;
            c.check(rep.passed(), format!("p={p} ν={nu} basis[{i}]: {} failures", rep.failures.len()));
        }
    }
    for p in [3u64, 5, 7] {
        let rep = eichler_verify(p, &HarmonicPoly::constant(3), 300).unwrap();
        checked += rep.checked;
        c.check(rep.passed(), format!("ν=0 p={p}: {} failures", rep.failures.len()));
    }
    c.within(start.elapsed(), Duration::from_secs(300), "verification");
    c.note(format!("{checked} coefficients exact over full bases of H_4, H_6 and the constant"));
    c.verdict()
}

fn neighbor_lemma() -> Verdict {
    let mut c = Checks::default();
    let p = 3u64;
    let mut vectors = 0;
    for k in (1..=9 * p * p).filter(|k| k % (p * p) == 0) {
        for v in lambda_points(k).unwrap() {
            let v = [v[0], v[1], v[2]];
            let got = neighbor_count(v, p).unwrap();
            let want = neighbor_count_lemma(v, p).unwrap();
            c.check(got == want, format!("v={v:?}: {got} vs lemma {want}"));
            vectors += 1;
        }
    }
    c.check(vectors > 0, "no vectors examined");
    c.note(format!("{vectors} vectors of R(9m, Λ), m ≤ 9, match the three-case count"));
    c.verdict()
}

fn hecke_structure() -> Verdict {
    let mut c = Checks::default();
    let primes: Vec<u64> = primes_up_to(100).into_iter().filter(|&p| p > 2).collect();
    for &p in &primes {
        let len = norm_reps(p).unwrap().reps.len() as u64;
        c.check(len == 24 * (p + 1), format!("p={p}: {len} elements of norm p"));
    }
    for nu in 0..=6 {
        let mats: Vec<_> = [3u64, 5, 7].iter().map(|&p| hecke_matrix(p, nu).unwrap()).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let commute = rational_matmul(&mats[i], &mats[j]) == rational_matmul(&mats[j], &mats[i]);
                c.check(commute, format!("ν={nu}: matrices {i},{j} do not commute"));
            }
        }
    }
    for p in [3u64, 5, 7, 11, 13] {
        let m = hecke_matrix(p, 0).unwrap();
        c.check(m == vec![vec![BigRational::from_integer(BigInt::from(p + 1))]], format!("p={p}: constant eigenvalue {m:?}"));
    }
    c.note(format!("24(p+1) for {} odd primes; T3,T5,T7 commute on H_0..H_6; constant eigenvalue p+1", primes.len()));
    c.verdict()
}

fn eigenform_arithmetic() -> Verdict {
    let mut c = Checks::default();
    let basis = hecke_eigenbasis(4, &[3, 5, 7]).unwrap();
    let primes: Vec<u64> = primes_up_to(100).into_iter().filter(|&p| p > 2).collect();
    let (mut used, mut worst_mult, mut worst_deligne, mut worst_mobius) = (0, 0.0f64, 0.0f64, 0.0f64);
    for (i, f) in basis.functions.iter().enumerate() {
        match hecke_lambda(&f.poly, 1) {
            Err(Error::VanishingFirstCoefficient) => continue,
            Err(e) => return Err(format!("function {i}: {e}")),
            Ok(_) => {}
        }
        used += 1;
        let lam = |n: u64| hecke_lambda(&f.poly, n).unwrap();
        let mult = (lam(15) - lam(3) * lam(5)).abs();
        c.check(mult < 1e-8, format!("function {i}: |λ(15) − λ(3)λ(5)| = {mult:e}"));
        worst_mult = worst_mult.max(mult);
        for &p in &primes {
            let l = lam(p).abs();
            c.check(l <= 2.0, format!("function {i}: |λ({p})| = {l}"));
            worst_deligne = worst_deligne.max(l);
        }
        for n in (1..=300u64).step_by(2) {
            let r = mobius_inversion_identity_check(&f.poly, n).unwrap();
            c.check(r < 1e-8, format!("function {i}: inversion residual {r:e} at n={n}"));
            worst_mobius = worst_mobius.max(r);
        }
    }
    c.check(used > 0, "no eigenfunction with A(1) ≠ 0");
    c.note(format!(
        "{used} of {} eigenfunctions with A(1) ≠ 0; max multiplicativity {worst_mult:.1e}, max |λ(p)| {worst_deligne:.3}, max inversion residual {worst_mobius:.1e}",
        basis.functions.len()
    ));
    c.verdict()
}

fn harmonic_analysis() -> Verdict {
    let mut c = Checks::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
    let mut worst_trace = 0.0f64;
    for nu in 0..=8 {
        let b = harmonic_basis(nu).unwrap();
        for _ in 0..100 {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let len = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            let x = v.map(|t| t / len);
            let s: f64 = b.orthonormal.iter().map(|p| p.eval(&x).powi(2)).sum();
            worst_trace = worst_trace.max((s - (2 * nu + 1) as f64).abs());
        }
    }
    c.check(worst_trace < 1e-8, format!("pre-trace error {worst_trace:e}"));

    let mut parseval = Vec::new();
    for r in [0.05, 0.1, 0.2] {
        let n = (20.0 / r) as usize;
        let coeffs = cap_gegenbauer_coeffs(n, r, 2).unwrap();
        let partial: f64 = coeffs.iter().enumerate().map(|(v, f)| f * f * (2 * v + 1) as f64).sum();
        let target = 1.0 / cap_measure(r, 2).unwrap();
        let rel = (partial - target) / target;
        c.check(rel.abs() < 0.01, format!("Parseval at R={r}, N={n}: partial sum off by {:.2}%", 100.0 * rel));
        parseval.push(format!("R={r}:{:+.2}%", 100.0 * rel));
    }

    let mut remainder = Vec::new();
    for d in [2usize, 3, 4] {
        let ratios: Vec<f64> = (0..=40)
            .map(|i| {
                let r = 0.01 * 50f64.powf(i as f64 / 40.0);
                let lead = area_ratio(d) * r.powi(d as i32) / d as f64;
                (cap_measure(r, d).unwrap() - lead).abs() / r.powi(d as i32 + 2)
            })
            .collect();
        let sup = ratios.iter().cloned().fold(0.0, f64::max);
        c.check(sup.is_finite() && ratios[0] <= ratios[40] * 1.01 + 1e-9, format!("d={d}: remainder ratio grows as R shrinks"));
        remainder.push(format!("d={d}:C={sup:.4}"));
    }
    c.note(format!(
        "pre-trace max error {worst_trace:.1e}; Parseval at N=20/R {}; remainder/R^(d+2) {}",
        parseval.join(" "),
        remainder.join(" ")
    ));
    c.verdict()
}

fn small_scale_equidistribution() -> Verdict {
    let mut c = Checks::default();
    let heights = [101u64, 301, 501, 1001];
    let mut iqrs = Vec::new();
    for &n in &heights {
        let set = omega_n(n, 2).unwrap();
        let s = summarize_ratios(&random_cap_ratios(&set, (n as f64).powf(-0.25), 200, 11).unwrap());
        c.check((0.5..=1.5).contains(&s.median), format!("n={n}: median {}", s.median));
        iqrs.push(s.iqr);
    }
    let xs: Vec<f64> = heights.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = iqrs.iter().map(|q| q.ln()).collect();
    let slope = least_squares(&xs, &ys).unwrap().exponent;
    c.check(slope < 0.0, format!("IQR trend slope {slope:.3} is not negative"));
    c.check(iqrs[3] < iqrs[0], "IQR at n=1001 not below n=101");
    let strict = iqrs.windows(2).all(|w| w[1] < w[0]);

    let mut var_notes = Vec::new();
    for &n in &heights {
        let v = variance_mc(n, (n as f64).powf(-0.4), 2000, 7).unwrap();
        c.check(v.variance <= v.bound + 3.0 * v.std_error, format!("n={n}: variance {} above bound {}", v.variance, v.bound));
        var_notes.push(format!("{:.3}/{:.3}", v.variance, v.bound));
    }
    c.note(format!(
        "IQR {:?}, log-log slope {slope:.3}, strictly decreasing: {strict}; variance/bound {}",
        iqrs.iter().map(|q| (q * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
        var_notes.join(" ")
    ));
    c.verdict()
}

fn covering_behavior() -> Verdict {
    let mut c = Checks::default();
    let mut primes = 0;
    for n in (3..=499u64).filter(|&n| is_prime(n) && n % 4 == 3) {
        let r = covering_radius(&omega_n(n, 2).unwrap().unit_vectors3(), 100_000, format!("n={n}")).unwrap();
        let floor = (2.0 / n as f64).sqrt() - r.resolution_error_bound;
        c.check(r.covering_radius >= floor, format!("n={n}: radius {} below {floor}", r.covering_radius));
        primes += 1;
    }
    let mk = |n: usize, r: f64| CoveringReport {
        label: format!("synthetic {n}"),
        num_points: n,
        covering_radius: r,
        method: CoveringMethod::Grid { k: 0 },
        resolution_error_bound: 0.0,
    };
    let sizes = [100usize, 1000, 10_000, 100_000];
    let e1 = covering_exponent_estimate(&sizes.map(|n| mk(n, (n as f64).powf(-0.5))), 2).unwrap().exponent;
    let e2 = covering_exponent_estimate(&sizes.map(|n| mk(n, (n as f64).powf(-1.0))), 2).unwrap().exponent;
    c.check((e1 - 1.0).abs() < 0.05, format!("calibration 1.0 gave {e1}"));
    c.check((e2 - 0.5).abs() < 0.05, format!("calibration 0.5 gave {e2}"));

    let series: Vec<CoveringReport> = [10u64, 20, 40, 70, 100]
        .iter()
        .map(|&t| covering_radius(&omega_t(t, 2).unwrap().unit_vectors3(), 100_000, format!("T={t}")).unwrap())
        .collect();
    let trend: Vec<String> = series
        .iter()
        .zip([10u64, 20, 40, 70, 100])
        .map(|(r, t)| format!("T={t}:R√T={:.3}", r.covering_radius * (t as f64).sqrt()))
        .collect();
    let fit = covering_exponent_estimate(&series, 2).unwrap();
    c.note(format!(
        "{primes} primes ≡ 3 mod 4 clear √(2/n) − mesh; calibrations {e1:.3}, {e2:.3}; Ω_T {} exponent {:.3} (reported only)",
        trend.join(" "),
        fit.exponent
    ));
    c.verdict()
}

fn linnik_desk_check() -> Verdict {
    let mut c = Checks::default();
    let rows = linnik_exponent_scan(499).unwrap();
    c.check(rows.iter().all(|r| r.z_min.is_some()), "some ℓ ≤ 499 has no primitive solution");
    c.check(rows.iter().all(|r| r.z_min.is_some_and(|z| z <= r.l)), "some z_min(ℓ²) exceeds ℓ");
    let r9 = linnik_min_z(9).unwrap();
    c.check(r9.z_min == Some(1) && r9.witness == Some([2, 2, 1]), format!("z_min(9): {r9:?}"));
    c.check(linnik_min_z(25).unwrap().z_min == Some(0), "z_min(25) != 0");
    let fit = linnik_dyadic_fit(&rows).unwrap();
    c.check(fit.exponent <= 1.0 / 3.0 + 0.1, format!("dyadic exponent {}", fit.exponent));
    let start = Instant::now();
    let full = linnik_exponent_scan(2001).unwrap();
    let elapsed = start.elapsed();
    c.within(elapsed, Duration::from_secs(120), "full scan");
    let full_fit = linnik_dyadic_fit(&full).unwrap();
    c.note(format!(
        "{} odd ℓ ≤ 499 solvable; dyadic exponent {:.3} (ℓ ≤ 499), {:.3} (ℓ ≤ 2001, {:.1}s)",
        rows.len(),
        fit.exponent,
        full_fit.exponent,
        elapsed.as_secs_f64()
    ));
    c.verdict()
}

fn run_rsl(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_rsl")).args(args).env_remove("RSL_CACHE").output().unwrap();
    assert!(out.status.success(), "rsl {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Verdict {
    let mut c = Checks::default();
    let runs: &[&[&str]] = &[
        &["variance", "--n", "101", "--R-rule", "n^-0.4", "--samples", "2000", "--seed", "7"],
        &["capstats", "--n", "1001", "--R-rule", "n^-0.25", "--samples", "200", "--seed", "11"],
        &["capstats", "--T", "60", "--R-rule", "0.5*T^-0.5", "--samples", "300", "--seed", "3"],
        &["eigenbasis", "--nu", "6", "--primes", "3,5,7", "--seed", "99"],
        &["theta", "--nu", "4", "--lift", "--seed", "5"],
        &["covering", "--T", "10,20,40", "--grid", "20000", "--epsilon", "0.05"],
    ];
    for args in runs {
        let a = run_rsl(args);
        let b = run_rsl(args);
        c.check(!a.is_empty() && a == b, format!("{} differs between runs", args[0]));
    }
    let mut one = vec!["--threads", "1"];
    one.extend_from_slice(runs[1]);
    c.check(run_rsl(&one) == run_rsl(runs[1]), "capstats differs between 1 thread and the default pool");
    c.note(format!("{} seeded commands byte-identical on re-run, also across thread counts", runs.len()));
    c.verdict()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact counting", exact_counting),
        ("Eichler relation", eichler_relation),
        ("p-neighbor lemma", neighbor_lemma),
        ("Hecke structure", hecke_structure),
        ("eigenform arithmetic", eigenform_arithmetic),
        ("harmonic analysis", harmonic_analysis),
        ("small-scale equidistribution", small_scale_equidistribution),
        ("covering behavior", covering_behavior),
        ("Linnik desk check", linnik_desk_check),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {}: PASS {name} [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name} [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
