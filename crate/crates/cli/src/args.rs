use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mlsparse::covsel::Strategy;
use mlsparse::logreg::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "mlsparse", version, about = "Multilevel solvers for l1-regularized problems")]
pub struct Cli {
    /// Worker threads for parallel kernels (all cores when unset).
    #[arg(long, global = true, env = "MLSPARSE_THREADS")]
    pub threads: Option<usize>,

    /// More log output; repeat for debug messages.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic data.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Estimate a sparse inverse covariance matrix.
    Covsel(CovselArgs),
    /// Train an l1-regularized logistic regression model.
    Logreg(LogregArgs),
    /// Run a suite of problems and solvers and print a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Samples from a random planar graph-Laplacian precision matrix.
    Covsel(GenCovselArgs),
    /// Sparse features with labels from a planted sparse logistic model.
    Logreg(GenLogregArgs),
}

#[derive(Debug, Args)]
pub struct GenCovselArgs {
    /// Number of variables (approximate: boundary points are trimmed).
    #[arg(long)]
    pub n: usize,
    /// Number of samples.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for `samples.csv` and `precision.mtx`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenLogregArgs {
    /// Number of features.
    #[arg(long)]
    pub n: usize,
    /// Number of samples.
    #[arg(long)]
    pub m: usize,
    /// Fraction of features with a planted nonzero weight.
    #[arg(long, default_value_t = 0.01)]
    pub sparsity: f64,
    /// Probability that a feature appears in a sample.
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output libsvm file.
    #[arg(long, default_value = "data.svm")]
    pub out: PathBuf,
    /// Also write the planted weights here.
    #[arg(long)]
    pub planted: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CovselArgs {
    /// Samples CSV, one line per variable.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = positive)]
    pub lambda: f64,
    /// bcd, ml-bcd, continuation or dc.
    #[arg(long, default_value = "ml-bcd", value_parser = parse_strategy)]
    pub solver: Strategy,
    #[arg(long, default_value_t = 256)]
    pub block_size: usize,
    /// Relative CG tolerance for the block's own columns of the inverse.
    #[arg(long, default_value_t = 1e-5)]
    pub cg_tol: f64,
    /// Relative CG tolerance for neighborhood columns.
    #[arg(long, default_value_t = 1e-4)]
    pub cg_neighbor_tol: f64,
    /// Relative tolerance of the inner Newton solve.
    #[arg(long, default_value_t = 1e-4)]
    pub newton_tol: f64,
    /// Stop once the subgradient norm is below this fraction of ||A||_1.
    #[arg(long, default_value_t = 5e-3)]
    pub stop_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Smallest group size of divide and conquer.
    #[arg(long, default_value_t = 64)]
    pub dc_floor: usize,
    /// Solution in Matrix Market form.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run report CSV (also printed).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LogregArgs {
    /// Dataset in libsvm format.
    #[arg(long)]
    pub data: PathBuf,
    /// Loss weight; the l1 weight is 1.
    #[arg(long = "c", value_parser = positive)]
    pub c: f64,
    /// cdn, ml-cdn, glmnet or ml-glmnet.
    #[arg(long, default_value = "ml-cdn", value_parser = parse_algorithm)]
    pub algo: Algorithm,
    /// Relative stopping tolerance.
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Add an unregularized bias feature.
    #[arg(long)]
    pub bias: bool,
    /// Skip settled zero coordinates in coordinate descent.
    #[arg(long)]
    pub shrink: bool,
    /// Visit coordinates in a random order drawn from this seed.
    #[arg(long)]
    pub shuffle: Option<u64>,
    /// Trained weights, one `index value` line per nonzero.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Suite description in TOML.
    #[arg(long)]
    pub suite: PathBuf,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: mlsparse::Error| e.to_string())
}

pub fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: mlsparse::Error| e.to_string())
}
