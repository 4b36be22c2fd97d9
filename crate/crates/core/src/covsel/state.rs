use super::problem::CovselProblem;
use crate::error::{Error, Result};
use crate::linalg::{dense_chol_logdet, SparseSymMatrix};

/// Per-entry gradient information gathered during the last unrestricted
/// sweep. Values are computed block by block from the `W` columns available
/// at the time, so they may lag behind the current iterate.
#[derive(Debug, Clone, Default)]
pub struct SweepGradient {
    /// Upper off-diagonal free pairs that are zero in `A`, with `|S - W|`.
    pub candidates: Vec<((usize, usize), f64)>,
    /// Number of upper free pairs (zero or not).
    pub free_upper: usize,
    /// Upper off-diagonal free pairs (the clustering graph).
    pub free_edges: Vec<(usize, usize)>,
    /// `||min-norm subgradient||_1` over both triangles.
    pub subgrad_l1: f64,
}

/// The iterate and objective bookkeeping of a covariance-selection solve.
#[derive(Debug, Clone)]
pub struct CovselState {
    pub a: SparseSymMatrix,
    /// `-logdet A + tr(S A)`, updated incrementally.
    pub smooth: f64,
    /// `||A||_1` over both triangles, updated incrementally.
    pub l1: f64,
    /// Largest number of nonzeros seen.
    pub peak_nnz: usize,
    pub sweep: SweepGradient,
    /// Bumped on every accepted update.
    pub version: u64,
}

impl CovselState {
    /// Starts from a positive definite `A0`. The smooth term is exact for a
    /// diagonal `A0` and computed by a dense factorization otherwise. The
    /// initial gradient view uses `W = diag(1 / a_ii)` when `A0` is diagonal.
    pub fn new(problem: &CovselProblem, a0: SparseSymMatrix) -> Result<Self> {
        if a0.dim() != problem.n() {
            return Err(Error::Dimension(format!(
                "initial matrix of size {} for {} variables",
                a0.dim(),
                problem.n()
            )));
        }
        a0.validate()?;
        let diag = a0.diag();
        let logdet = if a0.is_diagonal() {
            if diag.iter().any(|d| !(*d > 0.0)) {
                return Err(Error::NotPositiveDefinite);
            }
            diag.iter().map(|d| d.ln()).sum()
        } else {
            let ld = dense_chol_logdet(&a0.to_dense())?;
            if !ld.pd {
                return Err(Error::NotPositiveDefinite);
            }
            ld.logdet
        };
        let trace: f64 = a0
            .upper_entries()
            .map(|(i, j, v)| if i == j { v * problem.s_entry(i, i) } else { 2.0 * v * problem.s_entry(i, j) })
            .sum();
        let l1 = a0.l1_norm();
        let sweep = initial_sweep(problem, &a0);
        Ok(Self {
            peak_nnz: a0.nnz(),
            smooth: -logdet + trace,
            l1,
            a: a0,
            sweep,
            version: 0,
        })
    }

    pub fn identity(problem: &CovselProblem) -> Result<Self> {
        Self::new(problem, SparseSymMatrix::identity(problem.n()))
    }

    pub fn objective(&self, lam: f64) -> f64 {
        self.smooth + lam * self.l1
    }

    pub fn nnz(&self) -> usize {
        self.a.nnz()
    }
}

/// Free set `{|S_ij| > lam} ∪ supp(A0)` with magnitudes `|S - W|` for
/// `W = diag(1 / a_ii)`; off-diagonal entries of `A0` are treated as
/// support regardless of their gradient.
fn initial_sweep(problem: &CovselProblem, a0: &SparseSymMatrix) -> SweepGradient {
    let lam = problem.lam;
    let large = problem.large_covariances();
    let mut free_edges: Vec<(usize, usize)> = large.iter().map(|&(p, _)| p).collect();
    let mut candidates = Vec::new();
    let mut subgrad_l1 = 0.0;
    for &((i, j), s) in &large {
        if a0.get(i, j) == 0.0 {
            candidates.push(((i, j), s.abs()));
            subgrad_l1 += 2.0 * (s.abs() - lam);
        }
    }
    for (i, j, v) in a0.upper_entries() {
        let w = if i == j { 1.0 / v } else { 0.0 };
        let g = problem.s_entry(i, j) - w;
        let mult = if i == j { 1.0 } else { 2.0 };
        subgrad_l1 += mult * (g + lam * v.signum()).abs();
        if i != j {
            free_edges.push((i, j));
        }
    }
    free_edges.sort_unstable();
    free_edges.dedup();
    let free_upper = free_edges.len() + problem.n();
    SweepGradient {
        candidates,
        free_upper,
        free_edges,
        subgrad_l1,
    }
}

/// `-logdet A + tr(S A) + lam ||A||_1` by a dense factorization; `None` when
/// `A` is not positive definite.
pub fn exact_objective(problem: &CovselProblem, a: &SparseSymMatrix) -> Result<Option<f64>> {
    let ld = dense_chol_logdet(&a.to_dense())?;
    if !ld.pd {
        return Ok(None);
    }
    let trace: f64 = a
        .upper_entries()
        .map(|(i, j, v)| if i == j { v * problem.s_entry(i, i) } else { 2.0 * v * problem.s_entry(i, j) })
        .sum();
    Ok(Some(-ld.logdet + trace + problem.lam * a.l1_norm()))
}
