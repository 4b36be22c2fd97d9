use std::time::Instant;

use log::debug;

use super::hierarchy::{build_hierarchy, HierarchySeed, SupportHierarchy};
use crate::error::{Error, Result};

/// Position of a level inside a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelRole {
    /// Level 0: all variables may move; the gradient is refreshed here.
    Finest,
    Intermediate,
    /// Level `L`, relaxed until its own criterion holds.
    Coarsest,
}

#[derive(Debug, Clone, Copy)]
pub struct LevelContext {
    pub level: usize,
    pub depth: usize,
    pub role: LevelRole,
    /// Relaxation counter within the current level, from 0.
    pub sweep: usize,
}

impl LevelContext {
    pub fn finest() -> Self {
        Self {
            level: 0,
            depth: 0,
            role: LevelRole::Finest,
            sweep: 0,
        }
    }
}

/// A relaxation method for an l1-regularized problem that can be restricted
/// to a subset of its variables.
///
/// `relax` must leave variables outside the restriction untouched and must
/// never increase the objective.
pub trait Relaxation {
    type Var: Copy + Ord + std::fmt::Debug;
    type State;

    /// One relaxation. `restriction = None` means all variables.
    fn relax(
        &mut self,
        state: &mut Self::State,
        restriction: Option<&[Self::Var]>,
        ctx: &LevelContext,
    ) -> Result<()>;

    fn objective(&self, state: &Self::State) -> f64;

    fn support_size(&self, state: &Self::State) -> usize;

    /// Largest support seen so far, including inside relaxations.
    fn peak_support(&self, state: &Self::State) -> usize {
        self.support_size(state)
    }

    /// Support and gradient magnitudes from the most recent finest-level
    /// relaxation (or the initial gradient evaluation).
    fn hierarchy_seed(&self, state: &Self::State) -> HierarchySeed<Self::Var>;

    /// Coarsest-level stopping test.
    fn coarse_converged(&self, state: &Self::State, restriction: &[Self::Var], tol: f64) -> bool;

    /// Cumulative work units spent so far.
    fn work(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlConfig {
    /// Relaxations per level below the coarsest.
    pub nu: usize,
    /// Cap on coarsest-level relaxations.
    pub nu_coarse: usize,
    pub coarsening_ratio: f64,
    pub coarse_stop_tol: f64,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            nu: 1,
            nu_coarse: 10,
            coarsening_ratio: 0.5,
            coarse_stop_tol: 1e-6,
        }
    }
}

impl MlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.nu_coarse == 0 {
            return Err(Error::InvalidArgument("relaxation counts must be positive".into()));
        }
        if !(self.coarsening_ratio > 0.0 && self.coarsening_ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "coarsening ratio {} outside (0, 1)",
                self.coarsening_ratio
            )));
        }
        Ok(())
    }
}

/// Summary of one cycle.
#[derive(Debug, Clone)]
pub struct CycleReport<V> {
    pub hierarchy: SupportHierarchy<V>,
    pub objective_before: f64,
    pub objective_after: f64,
    /// Objective after every relaxation, in order.
    pub relaxation_objectives: Vec<f64>,
}

/// One multilevel cycle: relax the coarsest level until its criterion holds
/// (at most `nu_coarse` times), then each finer level `nu` times.
pub fn ml_cycle<R: Relaxation>(
    relax: &mut R,
    state: &mut R::State,
    cfg: &MlConfig,
) -> Result<CycleReport<R::Var>> {
    cfg.validate()?;
    let seed = relax.hierarchy_seed(state);
    let hierarchy = build_hierarchy(&seed, cfg.coarsening_ratio)?;
    let depth = hierarchy.depth();
    let before = relax.objective(state);
    let mut trace = Vec::new();

    let mut step = |relax: &mut R, state: &mut R::State, level: usize, role: LevelRole, sweep: usize| -> Result<()> {
        let f0 = relax.objective(state);
        let ctx = LevelContext {
            level,
            depth,
            role,
            sweep,
        };
        relax.relax(state, hierarchy.level(level), &ctx)?;
        let f1 = relax.objective(state);
        if f1 > f0 || f1.is_nan() {
            return Err(Error::ContractViolation {
                level,
                before: f0,
                after: f1,
            });
        }
        trace.push(f1);
        Ok(())
    };

    if depth == 0 {
        for sweep in 0..cfg.nu {
            step(relax, state, 0, LevelRole::Finest, sweep)?;
        }
    } else {
        let coarsest = hierarchy.level(depth).expect("depth > 0");
        for sweep in 0..cfg.nu_coarse {
            step(relax, state, depth, LevelRole::Coarsest, sweep)?;
            if relax.coarse_converged(state, coarsest, cfg.coarse_stop_tol) {
                break;
            }
        }
        for level in (0..depth).rev() {
            let role = if level == 0 {
                LevelRole::Finest
            } else {
                LevelRole::Intermediate
            };
            for sweep in 0..cfg.nu {
                step(relax, state, level, role, sweep)?;
            }
        }
    }
    let after = relax.objective(state);
    debug!(
        "cycle over {} levels {:?}: {before:.10e} -> {after:.10e}",
        depth + 1,
        hierarchy.sizes
    );
    Ok(CycleReport {
        hierarchy,
        objective_before: before,
        objective_after: after,
        relaxation_objectives: trace,
    })
}

/// One row per outer iteration (cycle or plain relaxation).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub cycle: usize,
    pub levels: usize,
    pub objective: f64,
    pub support: usize,
    pub max_support: usize,
    pub work: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
    pub max_support: usize,
}

impl SolveReport {
    pub fn final_objective(&self) -> Option<f64> {
        self.trace.last().map(|r| r.objective)
    }

    /// Trace as CSV with a header line.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("cycle,levels,objective,supp,max_supp,work\n");
        for r in &self.trace {
            s.push_str(&format!(
                "{},{},{:.12e},{},{},{}\n",
                r.cycle, r.levels, r.objective, r.support, r.max_support, r.work
            ));
        }
        s
    }
}

/// Repeats ML-cycles until `stop` holds or `max_cycles` are spent.
pub fn solve_outer<R: Relaxation>(
    relax: &mut R,
    state: &mut R::State,
    cfg: &MlConfig,
    mut stop: impl FnMut(&R, &R::State) -> bool,
    max_cycles: usize,
) -> Result<SolveReport> {
    run_outer(relax, state, max_cycles, &mut stop, |relax, state| {
        ml_cycle(relax, state, cfg).map(|r| r.hierarchy.depth() + 1)
    })
}

/// Baseline loop: one unrestricted relaxation per iteration, same trace.
pub fn solve_plain<R: Relaxation>(
    relax: &mut R,
    state: &mut R::State,
    mut stop: impl FnMut(&R, &R::State) -> bool,
    max_iterations: usize,
) -> Result<SolveReport> {
    run_outer(relax, state, max_iterations, &mut stop, |relax, state| {
        let f0 = relax.objective(state);
        relax.relax(state, None, &LevelContext::finest())?;
        let f1 = relax.objective(state);
        if f1 > f0 || f1.is_nan() {
            return Err(Error::ContractViolation {
                level: 0,
                before: f0,
                after: f1,
            });
        }
        Ok(1)
    })
}

fn run_outer<R: Relaxation>(
    relax: &mut R,
    state: &mut R::State,
    budget: usize,
    stop: &mut impl FnMut(&R, &R::State) -> bool,
    mut iterate: impl FnMut(&mut R, &mut R::State) -> Result<usize>,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut trace = Vec::new();
    let mut max_support = relax.peak_support(state);
    if stop(relax, state) {
        return Ok(SolveReport {
            trace,
            converged: true,
            iterations: 0,
            max_support,
        });
    }
    let mut converged = false;
    for cycle in 1..=budget {
        let levels = iterate(relax, state)?;
        let support = relax.support_size(state);
        max_support = max_support.max(relax.peak_support(state)).max(support);
        trace.push(TraceRow {
            cycle,
            levels,
            objective: relax.objective(state),
            support,
            max_support,
            work: relax.work(),
            seconds: start.elapsed().as_secs_f64(),
        });
        if stop(relax, state) {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        iterations: trace.len(),
        trace,
        converged,
        max_support,
    })
}
