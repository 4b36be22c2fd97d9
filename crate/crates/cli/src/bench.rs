use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use serde::Deserialize;

use mlsparse::covsel::{CovselConfig, Strategy};
use mlsparse::datagen::{
    normalize_rows, random_planar_laplacian, sample_from_precision, synth_logreg, PlanarGraphSpec, SampleMatrix,
    SynthLogregSpec,
};
use mlsparse::io::{read_libsvm, read_samples_csv};
use mlsparse::logreg::{Algorithm, LabeledDataset, LogRegConfig};

use crate::report::{mark_agreement, RunReport};
use crate::run::{covsel_config_echo, logreg_config_echo, run_covsel, run_logreg};

/// Objectives of one problem agree when within this relative distance.
pub const AGREEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub covsel: Vec<CovselCase>,
    #[serde(default)]
    pub logreg: Vec<LogregCase>,
}

/// Either a samples file or a generated planar problem of about `n`
/// variables per seed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovselCase {
    pub name: String,
    pub data: Option<PathBuf>,
    pub n: Option<usize>,
    #[serde(default = "default_samples")]
    pub m: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub lambdas: Vec<f64>,
    pub solvers: Vec<String>,
    pub max_iter: Option<usize>,
}

/// Either a libsvm file or a generated dataset per seed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogregCase {
    pub name: String,
    pub data: Option<PathBuf>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub c: Vec<f64>,
    pub algos: Vec<String>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub bias: bool,
}

fn default_samples() -> usize {
    200
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_sparsity() -> f64 {
    0.01
}

fn default_density() -> f64 {
    0.1
}

fn default_eps() -> f64 {
    1e-3
}

pub fn load_suite(path: &Path) -> Result<Suite> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn covsel_samples(case: &CovselCase, base: &Path, seed: u64) -> Result<SampleMatrix> {
    let raw = match (&case.data, case.n) {
        (Some(p), _) => {
            let p = resolve(base, p);
            read_samples_csv(BufReader::new(File::open(&p).with_context(|| format!("opening {}", p.display()))?))?
        }
        (None, Some(n)) => {
            let lap = random_planar_laplacian(PlanarGraphSpec::for_target(n, seed))?;
            sample_from_precision(&lap.matrix, case.m, seed)?
        }
        (None, None) => anyhow::bail!("covariance case {} needs `data` or `n`", case.name),
    };
    Ok(normalize_rows(&raw)?)
}

fn logreg_data(case: &LogregCase, base: &Path, seed: u64) -> Result<LabeledDataset> {
    match (&case.data, case.n, case.m) {
        (Some(p), _, _) => {
            let p = resolve(base, p);
            let f = File::open(&p).with_context(|| format!("opening {}", p.display()))?;
            Ok(read_libsvm(BufReader::new(f), None, case.bias)?)
        }
        (None, Some(n), Some(m)) => {
            let mut spec = SynthLogregSpec::new(n, m, case.sparsity, seed);
            spec.density = case.density;
            let s = synth_logreg(spec)?;
            if case.bias {
                Ok(LabeledDataset::new(n, s.data.rows(), s.data.labels().to_vec(), true)?)
            } else {
                Ok(s.data)
            }
        }
        _ => anyhow::bail!("logistic case {} needs `data` or both `n` and `m`", case.name),
    }
}

fn problem_name(name: &str, seed: u64, from_file: bool) -> String {
    if from_file {
        name.to_string()
    } else {
        format!("{name}/seed{seed}")
    }
}

/// Runs every (problem, seed, parameter, solver) combination. Failures are
/// recorded in their rows and the suite goes on.
pub fn run_suite(suite: &Suite, base: &Path) -> Vec<RunReport> {
    let mut rows = Vec::new();
    for case in &suite.covsel {
        let mut cfg = CovselConfig::default();
        if let Some(it) = case.max_iter {
            cfg.max_cycles = it;
        }
        let seeds = if case.data.is_some() { &[0][..] } else { &case.seeds[..] };
        for &seed in seeds {
            let name = problem_name(&case.name, seed, case.data.is_some());
            let samples = covsel_samples(case, base, seed);
            for &lam in &case.lambdas {
                for solver in &case.solvers {
                    let row = match (&samples, solver.parse::<Strategy>()) {
                        (Ok(s), Ok(st)) => run_covsel(&name, s.clone(), lam, st, &cfg).0,
                        (Err(e), _) => RunReport::failed(&name, solver, lam, covsel_config_echo(&cfg), format!("{e:#}")),
                        (_, Err(e)) => RunReport::failed(&name, solver, lam, covsel_config_echo(&cfg), e.to_string()),
                    };
                    info!("{} {} {}: {}", row.problem, row.solver, lam, row.cell);
                    rows.push(row);
                }
            }
        }
    }
    for case in &suite.logreg {
        let cfg = LogRegConfig {
            eps: case.eps,
            ..LogRegConfig::default()
        };
        let seeds = if case.data.is_some() { &[0][..] } else { &case.seeds[..] };
        for &seed in seeds {
            let name = problem_name(&case.name, seed, case.data.is_some());
            let data = logreg_data(case, base, seed);
            for &c in &case.c {
                for algo in &case.algos {
                    let row = match (&data, algo.parse::<Algorithm>()) {
                        (Ok(d), Ok(a)) => run_logreg(&name, d, c, a, &cfg).0,
                        (Err(e), _) => RunReport::failed(&name, algo, c, logreg_config_echo(&cfg), format!("{e:#}")),
                        (_, Err(e)) => RunReport::failed(&name, algo, c, logreg_config_echo(&cfg), e.to_string()),
                    };
                    info!("{} {} {}: {}", row.problem, row.solver, c, row.cell);
                    rows.push(row);
                }
            }
        }
    }
    mark_agreement(&mut rows, AGREEMENT_TOL);
    rows
}
