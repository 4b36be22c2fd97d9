use std::cell::Cell;
use std::collections::HashMap;

use log::{debug, warn};

use super::block::{
    block_linesearch, free_set_with, linesearch_matrices, newton_block_direction, restricted_neighborhood,
    restricted_w_rows, w_columns, BlockSystem, LineEntry, WColumns,
};
use super::partition::partition_columns;
use super::problem::CovselProblem;
use super::restrict::{Neighbors, Restriction};
use super::state::{CovselState, SweepGradient};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, IndexSet, SparseSymMatrix};
use crate::multilevel::{HierarchySeed, LevelContext, Relaxation};

/// Tolerances and sizes of a block coordinate descent sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdConfig {
    pub block_size: usize,
    /// CG tolerance for the block's own columns of `W`.
    pub cg_block_tol: f64,
    /// CG tolerance for the neighborhood columns.
    pub cg_neighbor_tol: f64,
    /// Relative tolerance of the inner Newton solve.
    pub newton_tol: f64,
    pub newton_max_sweeps: usize,
    /// Stop once `||min-norm subgradient||_1 < stop_tol * ||A||_1`.
    pub stop_tol: f64,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            block_size: 256,
            cg_block_tol: 1e-5,
            cg_neighbor_tol: 1e-4,
            newton_tol: 1e-4,
            newton_max_sweeps: 200,
            stop_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CycleStats {
    pub blocks: usize,
    /// Blocks whose step found no decreasing positive definite point.
    pub rejected: usize,
    pub matvecs: u64,
}

type Record = HashMap<(usize, usize), (f64, f64)>;

/// Off-diagonal entries below this fraction of `sqrt(A_pp A_qq)` are set to
/// zero after a step.
const SNAP: f64 = 1e-12;

/// One sweep over all column blocks. With `Restriction::All` the sweep also
/// refreshes the gradient view stored in the state; restricted sweeps
/// recover the block's own columns of `W` from the neighborhood columns
/// instead of solving for them.
pub fn bcd_ic_cycle(
    problem: &CovselProblem,
    state: &mut CovselState,
    cfg: &BcdConfig,
    restriction: Restriction<'_>,
) -> Result<CycleStats> {
    let n = problem.n();
    let nb = Neighbors::new(n, &restriction);
    let edges: Vec<(usize, usize)> = match restriction {
        Restriction::Pairs(c) => c.iter().copied().filter(|(i, j)| i != j).collect(),
        _ => state
            .sweep
            .free_edges
            .iter()
            .copied()
            .chain(state.a.upper_entries().filter(|(i, j, _)| i != j).map(|(i, j, _)| (i, j)))
            .filter(|&(i, j)| restriction.allows(i, j))
            .collect(),
    };
    let plan = partition_columns(n, &edges, cfg.block_size);
    let mut record = restriction.is_all().then(Record::new);
    let mut stats = CycleStats::default();
    for block in plan.blocks {
        let block = IndexSet::from_sorted(block)?;
        let (mv, accepted) = block_step(problem, state, cfg, &block, &nb, restriction.is_all(), record.as_mut())?;
        stats.blocks += 1;
        stats.matvecs += mv;
        if !accepted {
            stats.rejected += 1;
        }
    }
    if let Some(rec) = record {
        state.sweep = sweep_gradient(rec, problem.lam);
    }
    debug!(
        "sweep over {} blocks ({} rejected, {} matvecs): F = {:.10e}, nnz = {}",
        stats.blocks,
        stats.rejected,
        stats.matvecs,
        state.objective(problem.lam),
        state.nnz()
    );
    Ok(stats)
}

fn block_step(
    problem: &CovselProblem,
    state: &mut CovselState,
    cfg: &BcdConfig,
    block: &IndexSet,
    nb: &Neighbors,
    full: bool,
    record: Option<&mut Record>,
) -> Result<(u64, bool)> {
    let lam = problem.lam;
    let a = &state.a;
    let mut mv = 0;
    let (w_block, extra): (WColumns, Option<(IndexSet, DenseMatrix)>) = if full {
        let (wi, m) = w_columns(a, block, cfg.cg_block_tol)?;
        mv += m;
        (WColumns::full(block, wi), None)
    } else {
        let nc = restricted_neighborhood(a, block, nb);
        let (wnc, m) = w_columns(a, &nc, cfg.cg_block_tol)?;
        mv += m;
        (restricted_w_rows(a, block, &nc, &wnc)?, Some((nc, wnc)))
    };
    let free = free_set_with(problem, a, &w_block, nb)?;
    if let Some(rec) = record {
        for (k, &p) in free.upper.iter().enumerate() {
            rec.insert(p, (free.gradient[k], free.value[k]));
        }
    }
    let (ncols, nvals) = match extra {
        Some(x) => x,
        None => {
            let (w, m) = w_columns(a, &free.neighborhood, cfg.cg_neighbor_tol)?;
            mv += m;
            (free.neighborhood.clone(), w)
        }
    };
    let sys = BlockSystem::assemble(&w_block, &free.neighborhood, &ncols, &nvals)?;
    let dir = newton_block_direction(problem, &free, &sys, cfg.newton_tol, cfg.newton_max_sweeps)?;
    if dir.is_zero() {
        return Ok((mv, true));
    }
    let mats = linesearch_matrices(&sys.w_loc, sys.ni, &dir.local_entries())?;
    let entries: Vec<LineEntry> = (0..dir.vars.len())
        .filter(|&k| dir.z[k] != 0.0)
        .map(|k| {
            let (p, q) = dir.vars[k];
            LineEntry {
                s: problem.s_column(q)[p],
                x: free.value[k],
                z: dir.z[k],
                weight: dir.weights[k],
            }
        })
        .collect();
    let step = match block_linesearch(&mats, &entries, lam) {
        Ok(s) => s,
        Err(Error::Stagnation { trials }) => {
            warn!(
                "block of {} columns: no decreasing positive definite step in {trials} trials, skipped",
                block.len()
            );
            return Ok((mv, false));
        }
        Err(e) => return Err(e),
    };
    let mut updates = Vec::with_capacity(dir.vars.len());
    let mut smooth_delta = step.smooth_delta;
    let mut l1_delta = step.l1_delta;
    for k in (0..dir.vars.len()).filter(|&k| dir.z[k] != 0.0) {
        let (p, q) = dir.vars[k];
        let mut v = free.value[k] + step.alpha * dir.z[k];
        if p != q && v.abs() <= SNAP * (a.get(p, p) * a.get(q, q)).sqrt() {
            // drop residue that no representable step could remove
            let (lp, lq) = dir.local[k];
            let g = problem.s_column(q)[p] - sys.w_loc[(lp, lq)];
            smooth_delta -= 2.0 * g * v;
            l1_delta -= 2.0 * v.abs();
            v = 0.0;
        }
        updates.push((p, q, v));
    }
    state.a = state.a.with_upper_values(&updates);
    state.smooth += smooth_delta;
    state.l1 += l1_delta;
    state.version += 1;
    state.peak_nnz = state.peak_nnz.max(state.a.nnz());
    Ok((mv, true))
}

fn sweep_gradient(rec: Record, lam: f64) -> SweepGradient {
    let mut entries: Vec<_> = rec.into_iter().collect();
    entries.sort_unstable_by_key(|e| e.0);
    let mut out = SweepGradient {
        free_upper: entries.len(),
        ..SweepGradient::default()
    };
    for ((p, q), (g, v)) in entries {
        let mult = if p == q { 1.0 } else { 2.0 };
        if v != 0.0 {
            out.subgrad_l1 += mult * (g + lam * v.signum()).abs();
        } else {
            out.subgrad_l1 += mult * (g.abs() - lam).max(0.0);
            if p != q {
                out.candidates.push(((p, q), g.abs()));
            }
        }
        if p != q {
            out.free_edges.push((p, q));
        }
    }
    out
}

/// `||min-norm subgradient||_1` over both triangles given the full inverse
/// `W` (`n x n`).
pub fn subgradient_l1(problem: &CovselProblem, a: &SparseSymMatrix, w: &DenseMatrix) -> f64 {
    let lam = problem.lam;
    let mut total = 0.0;
    for j in 0..problem.n() {
        let s = problem.s_column(j);
        let wj = w.col(j);
        for i in 0..=j {
            let g = s[i] - 0.5 * (wj[i] + w.col(i)[j]);
            let v = a.get(i, j);
            let m = if v != 0.0 {
                (g + lam * v.signum()).abs()
            } else {
                (g.abs() - lam).max(0.0)
            };
            total += if i == j { m } else { 2.0 * m };
        }
    }
    total
}

/// The stopping rule: strict `subgrad_l1 < tol * ||A||_1`.
pub fn converged(subgrad_l1: f64, a_l1: f64, tol: f64) -> bool {
    subgrad_l1 < tol * a_l1
}

/// Outcome of a convergence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCheck {
    pub converged: bool,
    /// Estimate gathered during the last full sweep.
    pub stale: f64,
    /// Value from a fresh full `W`, computed only when the estimate passes.
    pub confirmed: Option<f64>,
    pub matvecs: u64,
}

/// Tests the stopping rule on the gradient view of the last full sweep and,
/// if that passes, confirms it with freshly computed columns of `W`.
pub fn check_convergence(problem: &CovselProblem, state: &CovselState, cfg: &BcdConfig) -> Result<ConvergenceCheck> {
    let stale = state.sweep.subgrad_l1;
    if !converged(stale, state.l1, cfg.stop_tol) {
        return Ok(ConvergenceCheck {
            converged: false,
            stale,
            confirmed: None,
            matvecs: 0,
        });
    }
    let (w, matvecs) = w_columns(&state.a, &IndexSet::range(problem.n()), cfg.cg_block_tol)?;
    let fresh = subgradient_l1(problem, &state.a, &w);
    Ok(ConvergenceCheck {
        converged: converged(fresh, state.a.l1_norm(), cfg.stop_tol),
        stale,
        confirmed: Some(fresh),
        matvecs,
    })
}

/// Block coordinate descent sweeps as a relaxation over upper pairs.
pub struct CovselRelaxation<'a> {
    pub problem: &'a CovselProblem,
    pub cfg: BcdConfig,
    work: u64,
    rejected: usize,
    check_work: Cell<u64>,
    last_check: Cell<Option<(u64, bool)>>,
}

impl<'a> CovselRelaxation<'a> {
    pub fn new(problem: &'a CovselProblem, cfg: BcdConfig) -> Self {
        Self {
            problem,
            cfg,
            work: 0,
            rejected: 0,
            check_work: Cell::new(0),
            last_check: Cell::new(None),
        }
    }

    /// Stopping rule, cached per iterate version. Failures of the
    /// confirmation solve count as not converged.
    pub fn converged(&self, state: &CovselState) -> bool {
        if let Some((v, c)) = self.last_check.get() {
            if v == state.version {
                return c;
            }
        }
        let c = match check_convergence(self.problem, state, &self.cfg) {
            Ok(chk) => {
                self.check_work.set(self.check_work.get() + chk.matvecs);
                chk.converged
            }
            Err(e) => {
                warn!("convergence check failed: {e}");
                false
            }
        };
        self.last_check.set(Some((state.version, c)));
        c
    }

    /// Matrix-vector products spent on convergence checks.
    pub fn check_work(&self) -> u64 {
        self.check_work.get()
    }

    pub fn rejected_blocks(&self) -> usize {
        self.rejected
    }

    pub(crate) fn sweep(&mut self, state: &mut CovselState, restriction: Restriction<'_>) -> Result<CycleStats> {
        let stats = bcd_ic_cycle(self.problem, state, &self.cfg, restriction)?;
        self.work += stats.matvecs;
        self.rejected += stats.rejected;
        Ok(stats)
    }
}

impl Relaxation for CovselRelaxation<'_> {
    type Var = (usize, usize);
    type State = CovselState;

    fn relax(&mut self, state: &mut CovselState, restriction: Option<&[(usize, usize)]>, _ctx: &LevelContext) -> Result<()> {
        let r = match restriction {
            None => Restriction::All,
            Some(c) => Restriction::Pairs(c),
        };
        self.sweep(state, r).map(|_| ())
    }

    fn objective(&self, state: &CovselState) -> f64 {
        state.objective(self.problem.lam)
    }

    fn support_size(&self, state: &CovselState) -> usize {
        state.nnz()
    }

    fn peak_support(&self, state: &CovselState) -> usize {
        state.peak_nnz
    }

    /// Support: the upper pairs of `A`. Candidates: free pairs from the last
    /// full sweep, ranked by `|S - W|`. The first coarse level holds half of
    /// the free set.
    fn hierarchy_seed(&self, state: &CovselState) -> HierarchySeed<(usize, usize)> {
        let n = self.problem.n();
        let mut support: Vec<(usize, usize)> = state.a.upper_entries().map(|(i, j, _)| (i, j)).collect();
        support.sort_unstable();
        let candidates = state
            .sweep
            .candidates
            .iter()
            .copied()
            .filter(|&((i, j), _)| state.a.get(i, j) == 0.0)
            .collect();
        HierarchySeed {
            universe_size: n * (n + 1) / 2,
            support,
            candidates,
            first_level_size: Some(state.sweep.free_upper.div_ceil(2)),
        }
    }

    /// One coarsest relaxation per cycle.
    fn coarse_converged(&self, _state: &CovselState, _restriction: &[(usize, usize)], _tol: f64) -> bool {
        true
    }

    fn work(&self) -> u64 {
        self.work
    }
}
