use std::cell::Cell;
use std::time::Instant;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::LabeledDataset;
use super::loss::{feature_dot, logistic_loss, loss_grad_cached, sigmoid, LogRegModel, LogisticHessian, MarginCache};
use crate::error::{Error, Result};
use crate::lasso::{HessianOperator, QuadraticModel};
use crate::linalg::{min_norm_subgradient_entry, scalar_prox, IndexSet};
use crate::multilevel::{
    solve_outer, solve_plain, HierarchySeed, LevelContext, LevelRole, MlConfig, Relaxation, SolveReport,
};

/// Solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Cdn,
    MlCdn,
    Glmnet,
    MlGlmnet,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Cdn => "cdn",
            Algorithm::MlCdn => "ml-cdn",
            Algorithm::Glmnet => "glmnet",
            Algorithm::MlGlmnet => "ml-glmnet",
        }
    }

    pub fn is_multilevel(&self) -> bool {
        matches!(self, Algorithm::MlCdn | Algorithm::MlGlmnet)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cdn" => Ok(Algorithm::Cdn),
            "ml-cdn" => Ok(Algorithm::MlCdn),
            "glmnet" => Ok(Algorithm::Glmnet),
            "ml-glmnet" => Ok(Algorithm::MlGlmnet),
            _ => Err(Error::InvalidArgument(format!("unknown logistic solver {s:?}"))),
        }
    }
}

/// Inner coordinate-descent sweeps per level of a multilevel GLMNET cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnerSweeps {
    pub finest: usize,
    pub intermediate: usize,
    /// Upper bound; fewer are used once the inner iteration settles.
    pub coarsest: usize,
}

impl Default for InnerSweeps {
    fn default() -> Self {
        Self {
            finest: 1,
            intermediate: 2,
            coarsest: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    /// Stopping tolerance relative to the first iterate.
    pub eps: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease constant of the line searches.
    pub sigma: f64,
    /// Step reduction factor of the line searches.
    pub beta: f64,
    pub max_linesearch: usize,
    /// Added to the Newton Hessian diagonal.
    pub ridge: f64,
    /// Inner sweeps of the plain proximal Newton solver stop once a sweep
    /// moves less than this fraction of the first sweep.
    pub inner_tol: f64,
    pub inner_max_sweeps: usize,
    pub ml_inner: InnerSweeps,
    /// Skip zero coordinates that look settled (coordinate descent only).
    pub shrink: bool,
    /// Visit coordinates in a seeded random order instead of ascending.
    pub shuffle: Option<u64>,
    pub ml: MlConfig,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_iterations: 1000,
            sigma: 0.01,
            beta: 0.5,
            max_linesearch: 40,
            ridge: 1e-12,
            inner_tol: 1e-3,
            inner_max_sweeps: 100,
            ml_inner: InnerSweeps::default(),
            shrink: false,
            shuffle: None,
            ml: MlConfig::default(),
        }
    }
}

/// Iterate of a logistic solver with its margin cache and bookkeeping.
#[derive(Debug, Clone)]
pub struct LogRegState {
    pub model: LogRegModel,
    pub cache: MarginCache,
    /// Objective, updated by the accepted decreases.
    pub objective: f64,
    /// Gradient of the smooth part from the last full pass, each entry taken
    /// when its coordinate was visited.
    pub grad: Vec<f64>,
    pub peak_nnz: usize,
    pub epochs: u64,
    shrink_bound: f64,
}

impl LogRegState {
    pub fn new(model: LogRegModel, data: &LabeledDataset) -> Result<Self> {
        if model.w.len() != data.dim() {
            return Err(Error::Dimension(format!(
                "{} weights for {} features",
                model.w.len(),
                data.dim()
            )));
        }
        if let Some(j) = model.w.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(j));
        }
        let cache = MarginCache::new(&model, data);
        let lg = loss_grad_cached(&cache, data, model.c);
        let objective = lg.loss + model.l1(data);
        let peak_nnz = model.nnz();
        Ok(Self {
            model,
            cache,
            objective,
            grad: lg.grad,
            peak_nnz,
            epochs: 0,
            shrink_bound: f64::INFINITY,
        })
    }

    pub fn version(&self) -> u64 {
        self.cache.version
    }

    pub fn nnz(&self) -> usize {
        self.model.nnz()
    }

    /// Objective recomputed from the weights.
    pub fn exact_objective(&self, data: &LabeledDataset) -> f64 {
        MarginCache::new(&self.model, data).loss(self.model.c) + self.model.l1(data)
    }
}

/// Work spent by one relaxation, in stored nonzeros visited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RelaxStats {
    pub updates: usize,
    pub work: u64,
}

/// `||min-norm subgradient||_1` of the full objective.
pub fn subgradient_l1(data: &LabeledDataset, w: &[f64], grad: &[f64]) -> f64 {
    (0..w.len())
        .map(|j| min_norm_subgradient_entry(grad[j], w[j], data.penalty(j)).abs())
        .sum()
}

/// The stopping rule `||g_k||_1 < eps * min(pos, neg) / m * ||g_1||_1`, with
/// `g` the min-norm subgradient and `g_1` taken at the first iterate. A zero
/// reference is met only by a zero subgradient.
pub fn logreg_converged(subgrad_l1: f64, reference_l1: f64, eps: f64, pos: usize, neg: usize) -> bool {
    let m = pos + neg;
    if reference_l1 == 0.0 || m == 0 {
        return subgrad_l1 == 0.0;
    }
    subgrad_l1 < eps * pos.min(neg) as f64 / m as f64 * reference_l1
}

/// Accepts the first `alpha = beta^k` with
/// `F(w + alpha d) - F(w) <= sigma * alpha * delta`; `diff(alpha)` returns
/// the objective change. Returns the step and its change.
fn backtrack(
    cfg: &LogRegConfig,
    delta: f64,
    mut diff: impl FnMut(f64) -> f64,
    work: &mut u64,
    cost: u64,
) -> Option<(f64, f64)> {
    let mut alpha = 1.0;
    for _ in 0..cfg.max_linesearch {
        let change = diff(alpha);
        *work += cost;
        if change <= cfg.sigma * alpha * delta {
            return Some((alpha, change));
        }
        alpha *= cfg.beta;
    }
    None
}

/// One pass of one-dimensional proximal Newton steps over the coordinates in
/// `restriction` (all when `None`), in ascending order unless shuffling.
pub fn cdn_epoch(
    data: &LabeledDataset,
    state: &mut LogRegState,
    cfg: &LogRegConfig,
    restriction: Option<&[usize]>,
    shrink: bool,
) -> Result<RelaxStats> {
    let c = state.model.c;
    let full = restriction.is_none();
    let mut coords: Vec<usize> = restriction.map_or_else(|| (0..data.dim()).collect(), <[usize]>::to_vec);
    if let Some(seed) = cfg.shuffle {
        coords.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ state.epochs));
    }
    state.epochs += 1;
    let bound = if shrink && full {
        1.0 - state.shrink_bound / data.m() as f64
    } else {
        f64::NEG_INFINITY
    };
    let mut stats = RelaxStats::default();
    let mut max_violation: f64 = 0.0;
    for j in coords {
        let (idx, val) = data.feature(j);
        let nnz = idx.len() as u64;
        let margins = &state.cache.margins;
        let (mut g, mut h) = (0.0, 0.0);
        for (&i, &x) in idx.iter().zip(val) {
            let t = sigmoid(margins[i]);
            g += (t - 1.0) * data.label(i) * x;
            h += t * (1.0 - t) * x * x;
        }
        g *= c;
        h = c * h + cfg.ridge;
        stats.work += nnz;
        if full {
            state.grad[j] = g;
        }
        let pen = data.penalty(j);
        let w = state.model.w[j];
        max_violation = max_violation.max(min_norm_subgradient_entry(g, w, pen).abs());
        if w == 0.0 && pen > 0.0 && g.abs() < pen * bound {
            continue;
        }
        let d = scalar_prox(h, g - h * w, pen)? - w;
        let delta = g * d + pen * ((w + d).abs() - w.abs());
        if d == 0.0 || !(delta < 0.0) {
            continue;
        }
        let diff = |alpha: f64| {
            let mut loss = 0.0;
            for (&i, &x) in idx.iter().zip(val) {
                let s = margins[i];
                loss += logistic_loss(s + alpha * d * data.label(i) * x) - logistic_loss(s);
            }
            c * loss + pen * ((w + alpha * d).abs() - w.abs())
        };
        if let Some((alpha, change)) = backtrack(cfg, delta, diff, &mut stats.work, nnz) {
            state.model.w[j] = w + alpha * d;
            state.cache.add_feature(data, j, alpha * d);
            state.objective += change;
            stats.updates += 1;
            stats.work += nnz;
        }
    }
    if full {
        state.shrink_bound = max_violation;
    }
    state.peak_nnz = state.peak_nnz.max(state.nnz());
    Ok(stats)
}

/// Minimizes a logistic Newton model by cyclic coordinate descent, keeping
/// `X_S^T d` per sample. Returns the direction in subset coordinates and the
/// sample products.
pub fn newton_coordinate_descent(
    model: &QuadraticModel<'_>,
    hess: &LogisticHessian<'_>,
    data: &LabeledDataset,
    max_sweeps: usize,
    rel_tol: f64,
) -> Result<(Vec<f64>, Vec<f64>, u64)> {
    let diag = hess.diagonal();
    let weights = hess.sample_weights();
    let subset = hess.subset().as_slice();
    let mut d = vec![0.0; subset.len()];
    let mut r = vec![0.0; data.m()];
    let mut work = 0;
    let mut first: Option<f64> = None;
    for _ in 0..max_sweeps {
        let mut moved = 0.0;
        for (k, &j) in subset.iter().enumerate() {
            let (idx, val) = data.feature(j);
            let hd: f64 = idx.iter().zip(val).map(|(&i, &x)| weights[i] * x * r[i]).sum::<f64>() + hess.ridge() * d[k];
            let x = model.base[k] + d[k];
            let step = scalar_prox(diag[k], model.grad[k] + hd - diag[k] * x, model.penalty(k))? - x;
            work += idx.len() as u64;
            if step != 0.0 {
                d[k] += step;
                for (&i, &v) in idx.iter().zip(val) {
                    r[i] += step * v;
                }
                moved += step.abs();
                work += idx.len() as u64;
            }
        }
        let first = *first.get_or_insert(moved);
        if moved == 0.0 || moved <= rel_tol * first {
            break;
        }
    }
    Ok((d, r, work))
}

/// One proximal Newton step on the free set of the coordinates in
/// `restriction`, with an inner coordinate-descent solve and a sufficient
/// decrease line search on the objective.
pub fn glmnet_newton_iteration(
    data: &LabeledDataset,
    state: &mut LogRegState,
    cfg: &LogRegConfig,
    restriction: Option<&[usize]>,
    inner_sweeps: usize,
) -> Result<RelaxStats> {
    let c = state.model.c;
    let coef = state.cache.gradient_coefficients(data, c);
    let coords: Vec<usize> = restriction.map_or_else(|| (0..data.dim()).collect(), <[usize]>::to_vec);
    let grad: Vec<f64> = coords.par_iter().map(|&j| feature_dot(data, j, &coef)).collect();
    let mut stats = RelaxStats {
        updates: 0,
        work: data.m() as u64 + coords.iter().map(|&j| data.feature_nnz(j) as u64).sum::<u64>(),
    };
    if restriction.is_none() {
        state.grad.clone_from(&grad);
    }
    let w = &state.model.w;
    let free: Vec<usize> = (0..coords.len())
        .filter(|&k| {
            let j = coords[k];
            w[j] != 0.0 || grad[k].abs() > data.penalty(j)
        })
        .collect();
    if free.is_empty() {
        return Ok(stats);
    }
    let subset = IndexSet::from_sorted(free.iter().map(|&k| coords[k]).collect())?;
    let hess = LogisticHessian::new(data, &state.cache, c, subset.clone(), cfg.ridge)?;
    let g: Vec<f64> = free.iter().map(|&k| grad[k]).collect();
    let base: Vec<f64> = subset.iter().map(|j| w[j]).collect();
    let pens: Vec<f64> = subset.iter().map(|j| data.penalty(j)).collect();
    let model = QuadraticModel::new(&hess, g, base, 1.0)?.with_weights(pens)?;
    let (d, r, cd_work) = newton_coordinate_descent(&model, &hess, data, inner_sweeps, cfg.inner_tol)?;
    stats.work += cd_work;
    let l1_change = |alpha: f64| -> f64 {
        (0..d.len())
            .map(|k| model.penalty(k) * ((model.base[k] + alpha * d[k]).abs() - model.base[k].abs()))
            .sum()
    };
    let delta: f64 = model.grad.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() + l1_change(1.0);
    if d.iter().all(|v| *v == 0.0) || !(delta < 0.0) {
        return Ok(stats);
    }
    let q: Vec<f64> = r.iter().enumerate().map(|(i, v)| v * data.label(i)).collect();
    let margins = &state.cache.margins;
    let diff = |alpha: f64| {
        let loss: f64 = margins
            .par_iter()
            .zip(q.par_iter())
            .filter(|(_, &qi)| qi != 0.0)
            .map(|(&s, &qi)| logistic_loss(s + alpha * qi) - logistic_loss(s))
            .sum();
        c * loss + l1_change(alpha)
    };
    let Some((alpha, change)) = backtrack(cfg, delta, diff, &mut stats.work, data.m() as u64) else {
        warn!("proximal Newton line search found no sufficient decrease");
        return Ok(stats);
    };
    for (k, j) in subset.iter().enumerate() {
        state.model.w[j] = model.base[k] + alpha * d[k];
    }
    for (m, qi) in state.cache.margins.iter_mut().zip(&q) {
        *m += alpha * qi;
    }
    state.cache.version += 1;
    state.objective += change;
    state.peak_nnz = state.peak_nnz.max(state.nnz());
    stats.updates = d.iter().filter(|v| **v != 0.0).count();
    stats.work += data.m() as u64;
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inner {
    Cdn,
    Glmnet,
}

/// CDN epochs or proximal Newton iterations as a relaxation over weights.
pub struct LogRegRelaxation<'a> {
    pub data: &'a LabeledDataset,
    pub cfg: LogRegConfig,
    pub inner: Inner,
    multilevel: bool,
    reference: f64,
    work: u64,
    check_work: Cell<u64>,
    last_check: Cell<Option<(u64, bool, f64)>>,
}

impl<'a> LogRegRelaxation<'a> {
    /// `state` is the first iterate; its subgradient norm is the reference
    /// of the stopping rule.
    pub fn new(data: &'a LabeledDataset, state: &LogRegState, cfg: LogRegConfig, inner: Inner, multilevel: bool) -> Self {
        let reference = subgradient_l1(data, &state.model.w, &state.grad);
        Self {
            data,
            cfg,
            inner,
            multilevel,
            reference,
            work: 0,
            check_work: Cell::new(0),
            last_check: Cell::new(None),
        }
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn check_work(&self) -> u64 {
        self.check_work.get()
    }

    /// Fresh min-norm subgradient norm at `state`.
    pub fn subgradient(&self, state: &LogRegState) -> f64 {
        if let Some((v, _, s)) = self.last_check.get() {
            if v == state.version() {
                return s;
            }
        }
        let lg = loss_grad_cached(&state.cache, self.data, state.model.c);
        self.check_work.set(self.check_work.get() + self.data.nnz() as u64 + self.data.m() as u64);
        let s = subgradient_l1(self.data, &state.model.w, &lg.grad);
        let c = logreg_converged(s, self.reference, self.cfg.eps, self.data.positives(), self.data.negatives());
        self.last_check.set(Some((state.version(), c, s)));
        s
    }

    pub fn converged(&self, state: &LogRegState) -> bool {
        self.subgradient(state);
        self.last_check.get().is_some_and(|(_, c, _)| c)
    }

    fn inner_sweeps(&self, ctx: &LevelContext) -> usize {
        if !self.multilevel {
            return self.cfg.inner_max_sweeps;
        }
        match ctx.role {
            LevelRole::Finest => self.cfg.ml_inner.finest,
            LevelRole::Intermediate => self.cfg.ml_inner.intermediate,
            LevelRole::Coarsest => self.cfg.ml_inner.coarsest,
        }
    }
}

impl Relaxation for LogRegRelaxation<'_> {
    type Var = usize;
    type State = LogRegState;

    fn relax(&mut self, state: &mut LogRegState, restriction: Option<&[usize]>, ctx: &LevelContext) -> Result<()> {
        let stats = match self.inner {
            Inner::Cdn => cdn_epoch(self.data, state, &self.cfg, restriction, self.cfg.shrink)?,
            Inner::Glmnet => {
                let sweeps = self.inner_sweeps(ctx);
                glmnet_newton_iteration(self.data, state, &self.cfg, restriction, sweeps)?
            }
        };
        self.work += stats.work;
        debug!(
            "level {} relaxation: {} updates, F = {:.10e}, nnz = {}",
            ctx.level,
            stats.updates,
            state.objective,
            state.nnz()
        );
        Ok(())
    }

    fn objective(&self, state: &LogRegState) -> f64 {
        state.objective
    }

    fn support_size(&self, state: &LogRegState) -> usize {
        state.nnz()
    }

    fn peak_support(&self, state: &LogRegState) -> usize {
        state.peak_nnz
    }

    /// Support: nonzero weights. Candidates: zero weights ranked by their
    /// last gradient magnitude. The first coarse level holds half of the
    /// free set.
    fn hierarchy_seed(&self, state: &LogRegState) -> HierarchySeed<usize> {
        let w = &state.model.w;
        let support: Vec<usize> = (0..w.len()).filter(|&j| w[j] != 0.0).collect();
        let candidates: Vec<(usize, f64)> = (0..w.len())
            .filter(|&j| w[j] == 0.0)
            .map(|j| (j, state.grad[j].abs()))
            .collect();
        let violating = candidates
            .iter()
            .filter(|&&(j, g)| g > self.data.penalty(j))
            .count();
        HierarchySeed {
            universe_size: w.len(),
            first_level_size: Some((support.len() + violating).div_ceil(2)),
            support,
            candidates,
        }
    }

    /// Min-norm subgradient on the level below `tol` times the reference.
    fn coarse_converged(&self, state: &LogRegState, restriction: &[usize], tol: f64) -> bool {
        let coef = state.cache.gradient_coefficients(self.data, state.model.c);
        let mut cost = self.data.m() as u64;
        let s: f64 = restriction
            .iter()
            .map(|&j| {
                cost += self.data.feature_nnz(j) as u64;
                let g = feature_dot(self.data, j, &coef);
                min_norm_subgradient_entry(g, state.model.w[j], self.data.penalty(j)).abs()
            })
            .sum();
        self.check_work.set(self.check_work.get() + cost);
        s <= tol * self.reference
    }

    fn work(&self) -> u64 {
        self.work
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct LogRegRun {
    pub model: LogRegModel,
    pub report: SolveReport,
    pub objective: f64,
    /// Min-norm subgradient norms at the first and final iterates.
    pub reference: f64,
    pub subgradient: f64,
    pub work: u64,
    pub check_work: u64,
    pub seconds: f64,
}

impl LogRegRun {
    pub fn converged(&self) -> bool {
        self.report.converged
    }
}

/// Trains from `model0` until the stopping rule holds or the iteration
/// budget is spent.
pub fn train(data: &LabeledDataset, model0: LogRegModel, algo: Algorithm, cfg: &LogRegConfig) -> Result<LogRegRun> {
    let start = Instant::now();
    let mut state = LogRegState::new(model0, data)?;
    let inner = match algo {
        Algorithm::Cdn | Algorithm::MlCdn => Inner::Cdn,
        Algorithm::Glmnet | Algorithm::MlGlmnet => Inner::Glmnet,
    };
    let mut relax = LogRegRelaxation::new(data, &state, *cfg, inner, algo.is_multilevel());
    let stop = |r: &LogRegRelaxation<'_>, s: &LogRegState| r.converged(s);
    let report = if algo.is_multilevel() {
        solve_outer(&mut relax, &mut state, &cfg.ml, stop, cfg.max_iterations)?
    } else {
        solve_plain(&mut relax, &mut state, stop, cfg.max_iterations)?
    };
    let subgradient = relax.subgradient(&state);
    Ok(LogRegRun {
        objective: state.objective,
        reference: relax.reference(),
        subgradient,
        work: relax.work(),
        check_work: relax.check_work(),
        seconds: start.elapsed().as_secs_f64(),
        model: state.model,
        report,
    })
}
