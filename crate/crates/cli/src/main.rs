mod args;
mod bench;
mod report;
mod run;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use log::{info, warn};

use args::{BenchArgs, Cli, Command, CovselArgs, GenCommand, GenCovselArgs, GenLogregArgs, LogregArgs};
use mlsparse::covsel::CovselConfig;
use mlsparse::datagen::{normalize_rows, random_planar_laplacian, sample_from_precision, synth_logreg, PlanarGraphSpec, SynthLogregSpec};
use mlsparse::io::{read_libsvm, read_samples_csv, write_libsvm, write_matrix_market, write_model, write_samples_csv};
use mlsparse::logreg::{LogRegConfig, LogRegModel};
use report::{write_reports, RunReport};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn emit_report(report: &RunReport, path: Option<&Path>) -> Result<()> {
    write_reports(io::stdout().lock(), std::slice::from_ref(report))?;
    if let Some(p) = path {
        write_reports(create(p)?, std::slice::from_ref(report))?;
    }
    Ok(())
}

fn gen_covsel(a: &GenCovselArgs) -> Result<()> {
    let lap = random_planar_laplacian(PlanarGraphSpec::for_target(a.n, a.seed))?;
    let samples = sample_from_precision(&lap.matrix, a.m, a.seed)?;
    let s_path = a.out.join("samples.csv");
    let p_path = a.out.join("precision.mtx");
    write_samples_csv(create(&s_path)?, &samples)?;
    write_matrix_market(create(&p_path)?, &lap.matrix)?;
    println!("{} variables, {} samples: {} {}", samples.n(), samples.m(), s_path.display(), p_path.display());
    Ok(())
}

fn gen_logreg(a: &GenLogregArgs) -> Result<()> {
    let mut spec = SynthLogregSpec::new(a.n, a.m, a.sparsity, a.seed);
    spec.density = a.density;
    let s = synth_logreg(spec)?;
    write_libsvm(create(&a.out)?, &s.data)?;
    if let Some(p) = &a.planted {
        write_model(create(p)?, &LogRegModel { w: s.planted.clone(), c: 1.0 })?;
    }
    println!("{} features, {} samples, {} nonzeros: {}", a.n, a.m, s.data.nnz(), a.out.display());
    Ok(())
}

fn covsel(a: &CovselArgs) -> Result<()> {
    let raw = read_samples_csv(open(&a.data)?).with_context(|| format!("reading {}", a.data.display()))?;
    let samples = normalize_rows(&raw)?;
    let mut cfg = CovselConfig::default();
    cfg.bcd.block_size = a.block_size;
    cfg.bcd.cg_block_tol = a.cg_tol;
    cfg.bcd.cg_neighbor_tol = a.cg_neighbor_tol;
    cfg.bcd.newton_tol = a.newton_tol;
    cfg.bcd.stop_tol = a.stop_tol;
    cfg.max_cycles = a.max_iter;
    cfg.dc_floor = a.dc_floor;
    let name = a.data.display().to_string();
    let (report, run) = run::run_covsel(&name, samples, a.lambda, a.solver, &cfg);
    if let Some(run) = &run {
        if !run.converged() {
            warn!("stopping rule not met after {} iterations", run.report.iterations);
        }
        if let Some(p) = &a.out {
            write_matrix_market(create(p)?, &run.state.a)?;
        }
        if let Some(p) = &a.trace {
            create(p)?.write_all(run.report.trace_csv().as_bytes())?;
        }
    }
    emit_report(&report, a.report.as_deref())?;
    if !report.error.is_empty() {
        anyhow::bail!("{}", report.error);
    }
    Ok(())
}

fn logreg(a: &LogregArgs) -> Result<()> {
    let data = read_libsvm(open(&a.data)?, None, a.bias).with_context(|| format!("reading {}", a.data.display()))?;
    let cfg = LogRegConfig {
        eps: a.eps,
        max_iterations: a.max_iter,
        shrink: a.shrink,
        shuffle: a.shuffle,
        ..LogRegConfig::default()
    };
    let name = a.data.display().to_string();
    let (report, run) = run::run_logreg(&name, &data, a.c, a.algo, &cfg);
    if let Some(run) = &run {
        if !run.converged() {
            warn!("stopping rule not met after {} iterations", run.report.iterations);
        }
        if let Some(p) = &a.out {
            write_model(create(p)?, &run.model)?;
        }
        if let Some(p) = &a.trace {
            create(p)?.write_all(run.report.trace_csv().as_bytes())?;
        }
    }
    emit_report(&report, a.report.as_deref())?;
    if !report.error.is_empty() {
        anyhow::bail!("{}", report.error);
    }
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let suite = bench::load_suite(&a.suite)?;
    let base = a.suite.parent().unwrap_or(Path::new("."));
    let rows = bench::run_suite(&suite, base);
    match &a.out {
        Some(p) => write_reports(create(p)?, &rows)?,
        None => write_reports(io::stdout().lock(), &rows)?,
    }
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        warn!("{failed} of {} runs failed", rows.len());
    }
    Ok(())
}

/// Usage errors exit with 2, everything else with 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<mlsparse::Error>() {
        Some(mlsparse::Error::InvalidArgument(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            warn!("could not set the thread count: {e}");
        }
    }
    info!("{:?}", cli.command);
    let result = match &cli.command {
        Command::Gen(GenCommand::Covsel(a)) => gen_covsel(a),
        Command::Gen(GenCommand::Logreg(a)) => gen_logreg(a),
        Command::Covsel(a) => covsel(a),
        Command::Logreg(a) => logreg(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
