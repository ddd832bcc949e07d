//! `rsl`: reproducible experiments on rational points of spheres.
//!
//! Every command writes JSON-lines records of the form
//! `{"command", "version", "config", "result"}` to stdout (or `--output`),
//! plus optional CSV/SVG side files.

mod commands;
mod rrule;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rrule::RRule;
use rsl_core::hecke::DEFAULT_EIGEN_SEED;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "rsl", version, about = "Rational points on spheres: counting, equidistribution and Hecke experiments")]
struct Cli {
    /// Directory for cached point sets.
    #[arg(long, env = "RSL_CACHE", global = true)]
    cache_dir: Option<PathBuf>,

    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write JSON-lines records here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Exactly one of a fixed height `n` or a height bound `T`.
#[derive(Args, Debug, Clone, Serialize)]
#[group(required = true, multiple = false)]
pub struct Height {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long = "T", alias = "t")]
    #[serde(rename = "T")]
    pub t: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Bin,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyChoice {
    /// Every element of the orthogonal basis of H_ν.
    Basis,
    /// `Re (x + iy)^4` (degree 4 only).
    ReXy4,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeChoice {
    Z3,
    Lambda,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate Ω_n or Ω_T and cross-check the count against the closed formula.
    Enumerate(EnumerateArgs),
    /// Count/expected ratios for seeded random caps.
    Capstats(CapstatsArgs),
    /// Monte-Carlo variance of cap counts against the divisor bound.
    Variance(VarianceArgs),
    /// Covering radii on a Fibonacci grid and the fitted covering exponent.
    Covering(CoveringArgs),
    /// Smallest |z| in primitive solutions of x² + y² + z² = ℓ².
    Linnik(LinnikArgs),
    /// Exact check of the Hecke coefficient relation on Λ-theta series.
    HeckeVerify(HeckeVerifyArgs),
    /// Simultaneous eigenfunctions of the quaternionic Hecke operators.
    Eigenbasis(EigenbasisArgs),
    /// Theta coefficients of a harmonic, or lift data of eigenfunctions.
    Theta(ThetaArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct EnumerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub height: Height,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// CSV destination (csv format).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CapstatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub height: Height,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Cap radius as `c*n^a` (or `c*T^a`).
    #[arg(long = "R-rule", alias = "r-rule")]
    #[serde(rename = "R_rule")]
    pub r_rule: RRule,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Per-cap ratios as CSV.
    #[arg(long)]
    pub ratios_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VarianceArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long = "R-rule", alias = "r-rule")]
    #[serde(rename = "R_rule")]
    pub r_rule: RRule,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct CoveringArgs {
    /// Comma-separated heights; one Ω_n per entry.
    #[arg(long, value_delimiter = ',', required_unless_present = "t")]
    pub n: Vec<u64>,
    /// Comma-separated height bounds; one Ω_T per entry.
    #[arg(long = "T", alias = "t", value_delimiter = ',', conflicts_with = "n")]
    #[serde(rename = "T")]
    pub t: Vec<u64>,
    /// Fibonacci grid size.
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
    /// Also report the generic covering radius at this uncovered fraction.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Orthographic scatter of the last set.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct LinnikArgs {
    #[arg(long)]
    pub lmax: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct HeckeVerifyArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub nu: usize,
    #[arg(long, default_value_t = 300)]
    pub nmax: u64,
    #[arg(long, value_enum, default_value_t = PolyChoice::Basis)]
    pub poly: PolyChoice,
}

#[derive(Args, Debug, Serialize)]
pub struct EigenbasisArgs {
    #[arg(long)]
    pub nu: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 5, 7])]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_EIGEN_SEED)]
    pub seed: u64,
    /// Directory for exact Hecke matrices, one CSV per prime.
    #[arg(long)]
    pub matrix_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ThetaArgs {
    #[arg(long)]
    pub nu: usize,
    #[arg(long, value_enum, default_value_t = LatticeChoice::Z3)]
    pub lattice: LatticeChoice,
    #[arg(long, default_value_t = 100)]
    pub nmax: u64,
    /// Index into the orthogonal basis of H_ν.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Report Kohnen-lift eigenvalues of the simultaneous eigenfunctions instead.
    #[arg(long)]
    pub lift: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 5, 7])]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_EIGEN_SEED)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = match commands::Context::new(cli.cache_dir.as_deref(), cli.output.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::Enumerate(a) => commands::enumerate(ctx, a),
        Command::Capstats(a) => commands::capstats(ctx, a),
        Command::Variance(a) => commands::variance(ctx, a),
        Command::Covering(a) => commands::covering(ctx, a),
        Command::Linnik(a) => commands::linnik(ctx, a),
        Command::HeckeVerify(a) => commands::hecke_verify(ctx, a),
        Command::Eigenbasis(a) => commands::eigenbasis(ctx, a),
        Command::Theta(a) => commands::theta(ctx, a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
