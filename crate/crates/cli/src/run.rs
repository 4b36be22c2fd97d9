use mlsparse::covsel::{solve, CovselConfig, CovselProblem, CovselRun, Strategy};
use mlsparse::datagen::SampleMatrix;
use mlsparse::linalg::SparseSymMatrix;
use mlsparse::logreg::{train, Algorithm, LabeledDataset, LogRegConfig, LogRegModel, LogRegRun};

use crate::report::RunReport;

pub fn covsel_config_echo(cfg: &CovselConfig) -> String {
    let b = &cfg.bcd;
    format!(
        "block={};cg={:e};cg_nb={:e};newton={:e};stop={:e};max_iter={};dc_floor={}",
        b.block_size, b.cg_block_tol, b.cg_neighbor_tol, b.newton_tol, b.stop_tol, cfg.max_cycles, cfg.dc_floor
    )
}

pub fn logreg_config_echo(cfg: &LogRegConfig) -> String {
    format!(
        "eps={:e};max_iter={};sigma={};beta={};shrink={};shuffle={}",
        cfg.eps,
        cfg.max_iterations,
        cfg.sigma,
        cfg.beta,
        cfg.shrink,
        cfg.shuffle.map_or("off".to_string(), |s| s.to_string())
    )
}

/// Solves from the identity and reports; `samples` must be normalized.
pub fn run_covsel(
    name: &str,
    samples: SampleMatrix,
    lam: f64,
    strategy: Strategy,
    cfg: &CovselConfig,
) -> (RunReport, Option<CovselRun>) {
    let echo = covsel_config_echo(cfg);
    let result = CovselProblem::new(samples, lam).and_then(|p| {
        let a0 = SparseSymMatrix::identity(p.n());
        solve(&p, strategy, a0, cfg)
    });
    match result {
        Ok(run) => {
            let mut r = RunReport {
                problem: name.into(),
                solver: strategy.name().into(),
                param: lam,
                seconds: run.seconds,
                iterations: run.report.iterations,
                max_supp: run.report.max_support,
                supp: run.state.nnz(),
                objective: run.objective(lam),
                converged: run.converged(),
                work: run.work,
                cell: String::new(),
                agrees: None,
                config: echo,
                error: String::new(),
            };
            r.fill_cell();
            (r, Some(run))
        }
        Err(e) => (RunReport::failed(name, strategy.name(), lam, echo, e.to_string()), None),
    }
}

pub fn run_logreg(
    name: &str,
    data: &LabeledDataset,
    c: f64,
    algo: Algorithm,
    cfg: &LogRegConfig,
) -> (RunReport, Option<LogRegRun>) {
    let echo = logreg_config_echo(cfg);
    let result = LogRegModel::zeros(data.dim(), c).and_then(|m| train(data, m, algo, cfg));
    match result {
        Ok(run) => {
            let mut r = RunReport {
                problem: name.into(),
                solver: algo.name().into(),
                param: c,
                seconds: run.seconds,
                iterations: run.report.iterations,
                max_supp: run.report.max_support,
                supp: run.model.nnz(),
                objective: run.objective,
                converged: run.converged(),
                work: run.work,
                cell: String::new(),
                agrees: None,
                config: echo,
                error: String::new(),
            };
            r.fill_cell();
            (r, Some(run))
        }
        Err(e) => (RunReport::failed(name, algo.name(), c, echo, e.to_string()), None),
    }
}
