use super::linesearch::armijo_linesearch;
use super::model::{shrinkage_direction, HessianOperator, QuadraticModel, StepKind};
use super::pcd_cg::pcd_cg_solve;
use crate::error::{Error, Result};
use crate::linalg::{dot, min_norm_subgradient_entry, DenseMatrix, IndexSet};
use crate::multilevel::{HierarchySeed, LevelContext, Relaxation};

/// `F(x) = x^T H x / 2 + <b, x> + lam ||x||_1` with `H` symmetric positive
/// definite.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    pub hessian: DenseMatrix,
    pub linear: Vec<f64>,
    pub lam: f64,
}

impl LassoProblem {
    pub fn new(hessian: DenseMatrix, linear: Vec<f64>, lam: f64) -> Result<Self> {
        if !hessian.is_square() || hessian.rows() != linear.len() {
            return Err(Error::Dimension("LASSO Hessian and linear term disagree".into()));
        }
        hessian.check_symmetric(1e-12)?;
        if !(lam >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative lambda {lam}")));
        }
        Ok(Self { hessian, linear, lam })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hessian.matvec(x);
        for (gi, bi) in g.iter_mut().zip(&self.linear) {
            *gi += bi;
        }
        g
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let hx = self.hessian.matvec(x);
        0.5 * dot(x, &hx) + dot(&self.linear, x) + self.lam * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Largest entry of the min-norm subgradient, optionally restricted.
    pub fn kkt_residual(&self, x: &[f64], restriction: Option<&[usize]>) -> f64 {
        let g = self.gradient(x);
        let entry = |i: usize| min_norm_subgradient_entry(g[i], x[i], self.lam).abs();
        match restriction {
            Some(r) => r.iter().map(|&i| entry(i)).fold(0.0, f64::max),
            None => (0..self.dim()).map(entry).fold(0.0, f64::max),
        }
    }

    pub fn initial_state(&self, x0: Vec<f64>) -> Result<LassoState> {
        if x0.len() != self.dim() {
            return Err(Error::Dimension("initial guess length".into()));
        }
        let grad = self.gradient(&x0);
        let objective = self.objective(&x0);
        let support = x0.iter().filter(|v| **v != 0.0).count();
        Ok(LassoState {
            x: x0,
            grad,
            objective,
            peak_support: support,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LassoState {
    pub x: Vec<f64>,
    /// `H x + b`, kept exact by incremental updates.
    pub grad: Vec<f64>,
    pub objective: f64,
    pub peak_support: usize,
}

/// Which step a LASSO relaxation takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LassoStep {
    /// Shrinkage step with the given diagonal scaling.
    Shrinkage(StepKind),
    /// Newton step solved by PCD-CG to a relative tolerance.
    PcdCg { rel_tol: f64, max_sweeps: usize },
}

/// Restricted relaxations for a [`LassoProblem`].
pub struct LassoRelaxation<'a> {
    pub problem: &'a LassoProblem,
    pub step: LassoStep,
    work: u64,
}

impl<'a> LassoRelaxation<'a> {
    pub fn new(problem: &'a LassoProblem, step: LassoStep) -> Self {
        Self {
            problem,
            step,
            work: 0,
        }
    }

    /// SSF relaxation with `c` from the power-iteration estimate.
    pub fn ssf(problem: &'a LassoProblem) -> Self {
        Self::new(problem, LassoStep::Shrinkage(StepKind::ssf_for(&problem.hessian)))
    }

    pub fn pcd(problem: &'a LassoProblem) -> Self {
        Self::new(problem, LassoStep::Shrinkage(StepKind::Pcd))
    }

    fn direction(&self, state: &LassoState, restriction: &IndexSet) -> Result<Vec<f64>> {
        let h: &dyn HessianOperator = &self.problem.hessian;
        let model = QuadraticModel::new(h, state.grad.clone(), state.x.clone(), self.problem.lam)?;
        match self.step {
            LassoStep::Shrinkage(kind) => shrinkage_direction(&model, kind, restriction),
            LassoStep::PcdCg { rel_tol, max_sweeps } => {
                Ok(pcd_cg_solve(&model, restriction, rel_tol, max_sweeps)?.z)
            }
        }
    }
}

impl Relaxation for LassoRelaxation<'_> {
    type Var = usize;
    type State = LassoState;

    fn relax(&mut self, state: &mut LassoState, restriction: Option<&[usize]>, _ctx: &LevelContext) -> Result<()> {
        let n = self.problem.dim();
        let set = match restriction {
            Some(r) => IndexSet::from_sorted(r.to_vec())?,
            None => IndexSet::range(n),
        };
        self.work += set.len() as u64;
        let z = self.direction(state, &set)?;
        if z.iter().all(|v| *v == 0.0) {
            return Ok(());
        }
        let hz = self.problem.hessian.matvec(&z);
        let lam = self.problem.lam;
        let zhz = dot(&z, &hz);
        let x = &state.x;
        let g = &state.grad;
        // F(x + a z) - F(x), grouping g_i and the l1 slope per coordinate so
        // the difference stays accurate close to the minimizer
        let eval = |a: f64| {
            let mut delta = 0.5 * a * a * zhz;
            for i in set.iter() {
                let (xi, zi) = (x[i], z[i]);
                if zi == 0.0 {
                    continue;
                }
                let moved = xi + a * zi;
                if xi != 0.0 && moved.signum() == xi.signum() {
                    delta += a * zi * (g[i] + lam * xi.signum());
                } else {
                    delta += a * zi * g[i] + lam * (moved.abs() - xi.abs());
                }
            }
            Some(delta)
        };
        let step = match armijo_linesearch(0.0, eval, 0.5, 1.0) {
            Ok(s) => s,
            Err(Error::Stagnation { .. }) => return Ok(()),
            Err(e) => return Err(e),
        };
        for i in set.iter() {
            state.x[i] += step.alpha * z[i];
        }
        for (g, h) in state.grad.iter_mut().zip(&hz) {
            *g += step.alpha * h;
        }
        state.objective += step.value;
        state.peak_support = state.peak_support.max(self.support_size(state));
        Ok(())
    }

    fn objective(&self, state: &LassoState) -> f64 {
        state.objective
    }

    fn support_size(&self, state: &LassoState) -> usize {
        state.x.iter().filter(|v| **v != 0.0).count()
    }

    fn peak_support(&self, state: &LassoState) -> usize {
        state.peak_support
    }

    fn hierarchy_seed(&self, state: &LassoState) -> HierarchySeed<usize> {
        let support: Vec<usize> = (0..state.x.len()).filter(|&i| state.x[i] != 0.0).collect();
        let candidates = (0..state.x.len())
            .filter(|&i| state.x[i] == 0.0)
            .map(|i| (i, state.grad[i].abs()))
            .collect();
        HierarchySeed {
            universe_size: state.x.len(),
            support,
            candidates,
            first_level_size: None,
        }
    }

    /// Restricted min-norm subgradient below `tol` times `max(1, ||b||_inf)`.
    fn coarse_converged(&self, state: &LassoState, restriction: &[usize], tol: f64) -> bool {
        let scale = self.problem.linear.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let lam = self.problem.lam;
        restriction
            .iter()
            .all(|&i| min_norm_subgradient_entry(state.grad[i], state.x[i], lam).abs() <= tol * scale)
    }

    fn work(&self) -> u64 {
        self.work
    }
}
