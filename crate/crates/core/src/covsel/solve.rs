use std::time::Instant;

use log::info;

use super::bcd::{BcdConfig, CovselRelaxation};
use super::partition::{adjacency, bfs_order};
use super::problem::CovselProblem;
use super::restrict::Restriction;
use super::state::CovselState;
use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::multilevel::{solve_outer, solve_plain, MlConfig, Relaxation, SolveReport, TraceRow};

/// How a covariance-selection problem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Plain block coordinate descent.
    Bcd,
    /// Multilevel cycles over nested free-set hierarchies.
    MlBcd,
    /// Warm starts from a decreasing sequence of regularization values.
    Continuation,
    /// Recursive bisection solved bottom-up.
    DivideAndConquer,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Bcd => "bcd",
            Strategy::MlBcd => "ml-bcd",
            Strategy::Continuation => "continuation",
            Strategy::DivideAndConquer => "dc",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bcd" => Ok(Strategy::Bcd),
            "ml-bcd" => Ok(Strategy::MlBcd),
            "continuation" => Ok(Strategy::Continuation),
            "dc" => Ok(Strategy::DivideAndConquer),
            _ => Err(Error::InvalidArgument(format!("unknown covariance solver {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovselConfig {
    pub bcd: BcdConfig,
    pub ml: MlConfig,
    /// Budget of cycles (or sweeps) for the final solve.
    pub max_cycles: usize,
    /// Divide-and-conquer stops splitting below this size.
    pub dc_floor: usize,
}

impl Default for CovselConfig {
    fn default() -> Self {
        Self {
            bcd: BcdConfig::default(),
            ml: MlConfig {
                nu: 1,
                nu_coarse: 1,
                coarsening_ratio: 0.5,
                coarse_stop_tol: 1e-6,
            },
            max_cycles: 200,
            dc_floor: 64,
        }
    }
}

/// Final state and trace of a solve.
#[derive(Debug, Clone)]
pub struct CovselRun {
    pub state: CovselState,
    pub report: SolveReport,
    /// Matrix-vector products spent inside relaxations.
    pub work: u64,
    /// Matrix-vector products spent confirming convergence.
    pub check_work: u64,
    pub rejected_blocks: usize,
    pub seconds: f64,
}

impl CovselRun {
    pub fn converged(&self) -> bool {
        self.report.converged
    }

    pub fn objective(&self, lam: f64) -> f64 {
        self.state.objective(lam)
    }
}

pub fn solve(problem: &CovselProblem, strategy: Strategy, a0: SparseSymMatrix, cfg: &CovselConfig) -> Result<CovselRun> {
    match strategy {
        Strategy::Bcd => bcd_solve(problem, a0, cfg),
        Strategy::MlBcd => ml_bcd_solve(problem, a0, cfg),
        Strategy::Continuation => continuation_solve(problem, a0, cfg),
        Strategy::DivideAndConquer => dc_solve(problem, a0, cfg),
    }
}

fn finish(relax: &CovselRelaxation<'_>, state: CovselState, report: SolveReport, start: Instant) -> CovselRun {
    CovselRun {
        state,
        report,
        work: relax.work(),
        check_work: relax.check_work(),
        rejected_blocks: relax.rejected_blocks(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Sweeps until the stopping rule holds.
pub fn bcd_solve(problem: &CovselProblem, a0: SparseSymMatrix, cfg: &CovselConfig) -> Result<CovselRun> {
    let start = Instant::now();
    let mut state = CovselState::new(problem, a0)?;
    let mut relax = CovselRelaxation::new(problem, cfg.bcd);
    let report = solve_plain(&mut relax, &mut state, |r, s| r.converged(s), cfg.max_cycles)?;
    Ok(finish(&relax, state, report, start))
}

/// Multilevel cycles with one relaxation per level; the first coarse level
/// keeps half of the free set.
pub fn ml_bcd_solve(problem: &CovselProblem, a0: SparseSymMatrix, cfg: &CovselConfig) -> Result<CovselRun> {
    let start = Instant::now();
    let mut state = CovselState::new(problem, a0)?;
    let mut relax = CovselRelaxation::new(problem, cfg.bcd);
    let report = solve_outer(&mut relax, &mut state, &cfg.ml, |r, s| r.converged(s), cfg.max_cycles)?;
    Ok(finish(&relax, state, report, start))
}

/// `(1 + lam) / 2` down to `lam` in four linearly spaced steps.
pub fn continuation_schedule(lam: f64) -> [f64; 4] {
    let top = (1.0 + lam) / 2.0;
    let h = (top - lam) / 3.0;
    [top, top - h, top - 2.0 * h, lam]
}

/// Runs a warm-up sweep and appends its trace row, rejecting any increase of
/// the objective at the sweep's own regularization.
fn warm_sweep(
    relax: &mut CovselRelaxation<'_>,
    state: &mut CovselState,
    restriction: Restriction<'_>,
    target_lam: f64,
    trace: &mut Vec<TraceRow>,
    start: Instant,
) -> Result<()> {
    let lam = relax.problem.lam;
    let before = state.objective(lam);
    relax.sweep(state, restriction)?;
    let after = state.objective(lam);
    if after > before || after.is_nan() {
        return Err(Error::ContractViolation { level: 0, before, after });
    }
    trace.push(TraceRow {
        cycle: trace.len() + 1,
        levels: 1,
        objective: state.objective(target_lam),
        support: state.nnz(),
        max_support: state.peak_nnz,
        work: relax.work(),
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(())
}

/// Appends the final plain solve to the warm-up rows.
fn merge_reports(mut warm: Vec<TraceRow>, tail: SolveReport, base_work: u64) -> SolveReport {
    let offset = warm.len();
    let mut max_support = warm.last().map_or(0, |r| r.max_support);
    for mut row in tail.trace {
        row.cycle += offset;
        row.work += base_work;
        max_support = max_support.max(row.max_support);
        row.max_support = max_support;
        warm.push(row);
    }
    SolveReport {
        iterations: warm.len(),
        trace: warm,
        converged: tail.converged,
        max_support: max_support.max(tail.max_support),
    }
}

/// One sweep at each value of [`continuation_schedule`], then sweeps at the
/// target value until the stopping rule holds.
pub fn continuation_solve(problem: &CovselProblem, a0: SparseSymMatrix, cfg: &CovselConfig) -> Result<CovselRun> {
    let start = Instant::now();
    let mut state = CovselState::new(problem, a0)?;
    let mut trace = Vec::new();
    let mut warm_work = 0;
    let mut warm_rejected = 0;
    for lam in continuation_schedule(problem.lam) {
        let p = problem.with_lambda(lam)?;
        let mut relax = CovselRelaxation::new(&p, cfg.bcd);
        warm_sweep(&mut relax, &mut state, Restriction::All, problem.lam, &mut trace, start)?;
        if let Some(r) = trace.last_mut() {
            r.work += warm_work;
        }
        warm_work += relax.work();
        warm_rejected += relax.rejected_blocks();
        info!("continuation at lambda {lam:.4}: nnz {}", state.nnz());
    }
    let mut relax = CovselRelaxation::new(problem, cfg.bcd);
    let tail = solve_plain(&mut relax, &mut state, |r, s| r.converged(s), cfg.max_cycles)?;
    let report = merge_reports(trace, tail, warm_work);
    let mut run = finish(&relax, state, report, start);
    run.work += warm_work;
    run.rejected_blocks += warm_rejected;
    Ok(run)
}

/// Group labels per bisection depth, from the root (one group) down to the
/// leaves. Each group is split in half along a breadth-first order of the
/// graph until it has at most `floor` vertices.
pub fn bisection_levels(n: usize, edges: &[(usize, usize)], floor: usize) -> Vec<Vec<usize>> {
    let adj = adjacency(n, edges);
    let floor = floor.max(1);
    let mut groups: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut levels = vec![vec![0; n]];
    while groups.iter().any(|g| g.len() > floor) {
        let mut next = Vec::new();
        for g in groups {
            if g.len() > floor {
                let order = bfs_order(&adj, &g);
                let (lo, hi) = order.split_at(order.len() / 2);
                next.push(lo.to_vec());
                next.push(hi.to_vec());
            } else {
                next.push(g);
            }
        }
        let mut label = vec![0; n];
        for (k, g) in next.iter().enumerate() {
            for &v in g {
                label[v] = k;
            }
        }
        levels.push(label);
        groups = next;
    }
    levels
}

/// Bisects the initial free-set graph down to `dc_floor`, sweeps the
/// deepest level with entries confined to the groups, then every coarser
/// grouping, and finally solves the full problem.
pub fn dc_solve(problem: &CovselProblem, a0: SparseSymMatrix, cfg: &CovselConfig) -> Result<CovselRun> {
    if !a0.is_diagonal() {
        return Err(Error::InvalidArgument(
            "divide and conquer needs a diagonal initial matrix".into(),
        ));
    }
    let start = Instant::now();
    let mut state = CovselState::new(problem, a0)?;
    let levels = bisection_levels(problem.n(), &state.sweep.free_edges, cfg.dc_floor);
    let mut relax = CovselRelaxation::new(problem, cfg.bcd);
    let mut trace = Vec::new();
    for labels in levels.iter().skip(1).rev() {
        warm_sweep(&mut relax, &mut state, Restriction::Groups(labels), problem.lam, &mut trace, start)?;
    }
    let tail = solve_plain(&mut relax, &mut state, |r, s| r.converged(s), cfg.max_cycles)?;
    let report = merge_reports(trace, tail, 0);
    Ok(finish(&relax, state, report, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let s = continuation_schedule(0.6);
        let want = [0.8, 0.8 - 0.2 / 3.0, 0.8 - 0.4 / 3.0, 0.6];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(continuation_schedule(1.0), [1.0; 4]);
    }

    #[test]
    fn bisection_halves_chain() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1)).collect();
        let levels = bisection_levels(10, &edges, 3);
        let leaves = levels.last().unwrap();
        let mut sizes = std::collections::BTreeMap::new();
        for &l in leaves {
            *sizes.entry(l).or_insert(0) += 1;
        }
        assert!(sizes.values().all(|&s| s <= 3));
        assert_eq!(levels[1][..5], [0; 5]);
        assert_eq!(levels[1][5..], [1; 5]);
    }
}
