use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use freemax::laws::FreeType;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "freemax",
    version,
    about = "Free extremal convolutions, free max-stable laws and spectral-order experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Tabulate a law on a grid.
    Law(LawArgs),
    /// Free (or classical) max/min convolution of two laws, or the f_c
    /// homomorphism check over the built-in catalog.
    Conv(ConvArgs),
    /// Normalized free iterates of a canonical law against its limit type.
    Iterate(IterateArgs),
    /// Free max-stability: closed-form fixed points, or a stability test
    /// for an arbitrary law.
    Stable(StableArgs),
    /// Domain-of-attraction convergence with the standard norming recipe.
    Attract(AttractArgs),
    /// Peaks over threshold: GPD fits and Balkema–de Haan distances.
    Pot(PotArgs),
    /// Finite-dimensional spectral order experiments.
    Spectral(SpectralArgs),
    /// Free Poisson random-matrix laboratory.
    Poisson(PoissonArgs),
}

/// A law is given as LawSpec JSON (`{"kind":"Uniform"}`), a catalog name
/// (`cauchy`, `log_pareto`, ...) or the path of an `x,F` CSV table.
#[derive(Debug, Args, Serialize)]
pub struct LawArgs {
    #[arg(long)]
    pub law: String,
    /// Apply the map f_c before tabulating.
    #[arg(long)]
    pub fc: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    /// Number of grid points spanning the central quantile range.
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
    /// Explicit evaluation points; overrides the automatic grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvOp {
    FreeMax,
    FreeMin,
    ClassicalMax,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvArgs {
    /// Two laws, e.g. `--law A --law B`.
    #[arg(long = "law", required_unless_present = "homomorphism")]
    pub laws: Vec<String>,
    #[arg(long, value_enum, default_value_t = ConvOp::FreeMax)]
    pub op: ConvOp,
    /// Check f_c(F·G) = f_c(F) ⊡ f_c(G) over all catalog pairs, and the
    /// images of the classical extreme-value laws under f_1.
    #[arg(long)]
    pub homomorphism: bool,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub c: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct IterateArgs {
    #[arg(long)]
    pub law: String,
    #[arg(long = "type", value_parser = parse_type)]
    pub kind: FreeType,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_count)]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct StableArgs {
    /// Test this law instead of the standard free types.
    #[arg(long, conflicts_with_all = ["kinds", "alpha", "n"])]
    pub law: Option<String>,
    #[arg(long = "type", value_delimiter = ',', value_parser = parse_type)]
    pub kinds: Vec<FreeType>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub n: Vec<u64>,
    /// Iterate counts for the stability test of `--law`.
    #[arg(long, value_delimiter = ',', default_value = "2,10", value_parser = parse_count)]
    pub k: Vec<u64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AttractArgs {
    #[arg(long)]
    pub law: String,
    #[arg(long = "type", value_parser = parse_type)]
    pub kind: FreeType,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_count)]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PotArgs {
    /// Sample file (one value per line, or CSV with a `value` column).
    #[arg(long, conflicts_with = "law")]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub law: Option<String>,
    /// Thresholds. A fit uses a single threshold (default: none).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Vec<f64>,
    /// GPD index for the Balkema–de Haan comparison of `--law`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Fit a GPD to this many inverse-CDF draws from `--law`.
    #[arg(long, conflicts_with = "gamma")]
    pub draws: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectralArgs {
    #[command(subcommand)]
    pub task: SpectralTask,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralTask {
    /// Spectral maximum a∨b of two matrix CSV files.
    Max(PairFiles),
    /// Spectral minimum a∧b of two matrix CSV files.
    Min(PairFiles),
    /// Whether a ≺ b in the spectral order.
    Leq(PairFiles),
    /// Join/meet ranks of independent Haar projection pairs.
    GeneralPosition(GeneralPositionArgs),
    /// Spectral distribution of a∨b and a∧b against the free convolutions
    /// of the input spectral distributions.
    Identity(IdentityArgs),
    /// Distance of the p-norm or log-exp approximations to a∨b.
    Approx(ApproxArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PairFiles {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Emit the full matrix instead of its eigenvalues.
    #[arg(long)]
    pub matrix: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GeneralPositionArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranks: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentityArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxMethod {
    Pnorm,
    Logexp,
}

#[derive(Debug, Args, Serialize)]
pub struct ApproxArgs {
    #[arg(long, value_enum, default_value_t = ApproxMethod::Pnorm)]
    pub method: ApproxMethod,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    /// Include the spin pair diag(1,−1), [[0,1],[1,0]], shifted by 2I.
    #[arg(long)]
    pub spin: bool,
    /// Include this many random symmetric pairs (shifted to be positive
    /// semidefinite for the p-norm method).
    #[arg(long, default_value_t = 0)]
    pub pairs: usize,
    #[arg(long = "N", default_value_t = 8)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Shift both inputs so that any spectrum is accepted (p-norm only).
    #[arg(long)]
    pub shift: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PoissonArgs {
    /// Partition JSON: `{"atoms":[{"id":1,"mass":0.3},...]}`.
    #[arg(long)]
    pub partition: PathBuf,
    /// Subsets of atom ids, e.g. `"1;2;1,2"`. Default: every subset.
    #[arg(long)]
    pub subsets: Option<String>,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Realize the triangular extremal process instead of free Poisson
    /// matrices and compare each subset maximum with its law.
    #[arg(long)]
    pub triangular: bool,
    /// Write the eigenvalues of Π(ω) from the first trial, one CSV per
    /// subset, into this directory.
    #[arg(long)]
    #[serde(skip)]
    pub dump_eigenvalues: Option<PathBuf>,
}

fn parse_type(s: &str) -> Result<FreeType, String> {
    s.parse().map_err(|e: freemax::Error| e.to_string())
}

/// Accepts `1000000` as well as `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(x as u64),
        _ => Err(format!("`{s}` is not a nonnegative integer")),
    }
}
