//! One block of columns: inverse columns, free set, Newton direction and the
//! Schur-complement line search.

use rayon::prelude::*;

use super::problem::CovselProblem;
use super::restrict::Neighbors;
use crate::error::{Error, Result};
use crate::lasso::{armijo_linesearch, pcd_cg_solve, HessianOperator, LineSearchStep, QuadraticModel};
use crate::linalg::{inverse_columns, Cholesky, DenseMatrix, IndexSet, SparseSymMatrix};

const NONE: usize = usize::MAX;

fn cg_budget(n: usize) -> usize {
    (4 * n).max(1000)
}

/// Columns `cols` of `A^{-1}` (all `n` rows) by CG, with the number of
/// matrix-vector products spent.
pub fn w_columns(a: &SparseSymMatrix, cols: &IndexSet, rel_tol: f64) -> Result<(DenseMatrix, u64)> {
    let r = inverse_columns(a, cols.as_slice(), rel_tol, cg_budget(a.dim()))?.into_result(cols.as_slice())?;
    let mv = r.matvecs();
    Ok((r.columns, mv))
}

/// Columns `block` of `W = A^{-1}`, known on a subset of rows.
#[derive(Debug, Clone)]
pub struct WColumns {
    pub block: Vec<usize>,
    row_pos: Vec<usize>,
    /// `rows.len() x block.len()`.
    pub values: DenseMatrix,
}

impl WColumns {
    /// From full columns (`n x |block|`).
    pub fn full(block: &IndexSet, values: DenseMatrix) -> Self {
        let n = values.rows();
        Self {
            block: block.as_slice().to_vec(),
            row_pos: (0..n).collect(),
            values,
        }
    }

    fn from_rows(n: usize, block: Vec<usize>, rows: Vec<usize>, values: DenseMatrix) -> Self {
        let mut row_pos = vec![NONE; n];
        for (k, &r) in rows.iter().enumerate() {
            row_pos[r] = k;
        }
        Self {
            block,
            row_pos,
            values,
        }
    }

    /// `W[r, block[k]]` if row `r` is stored.
    pub fn get(&self, r: usize, k: usize) -> Option<f64> {
        match self.row_pos[r] {
            NONE => None,
            p => Some(self.values[(p, k)]),
        }
    }
}

/// Rows outside `block` that a restricted block step needs: neighbors of
/// the block under the restriction plus neighbors through entries of `A`.
pub(crate) fn restricted_neighborhood(a: &SparseSymMatrix, block: &IndexSet, nb: &Neighbors) -> IndexSet {
    let mut out = Vec::new();
    for c in block.iter() {
        out.extend(nb.of(c).filter(|&r| !block.contains(r)));
        let (rows, vals) = a.col(c);
        out.extend(
            rows.iter()
                .zip(vals)
                .filter(|(&r, &v)| v != 0.0 && !block.contains(r))
                .map(|(&r, _)| r),
        );
    }
    IndexSet::from_unsorted(out)
}

/// Recovers `W_{block}` on the rows `block ∪ nc` from the columns of `W` on
/// `nc` alone: with `K = A[block, nc] W[nc, block]`,
/// `W11 = A11^{-1} (I - K)`; the `nc` rows follow by symmetry.
///
/// `w_nc` holds full columns `nc` of `W` (`n x |nc|`). Every entry of `A`
/// coupling the block to the outside must lie in `nc`.
pub fn restricted_w_rows(
    a: &SparseSymMatrix,
    block: &IndexSet,
    nc: &IndexSet,
    w_nc: &DenseMatrix,
) -> Result<WColumns> {
    let n = a.dim();
    let b = block.len();
    if w_nc.rows() != n || w_nc.cols() != nc.len() {
        return Err(Error::Dimension("neighborhood columns of W".into()));
    }
    let mut k = DenseMatrix::zeros(b, b);
    let mut a11 = DenseMatrix::zeros(b, b);
    let mut missing = Vec::new();
    for (ia, i) in block.iter().enumerate() {
        let (rows, vals) = a.col(i);
        for (&r, &v) in rows.iter().zip(vals) {
            if let Some(ir) = block.position(r) {
                a11[(ir, ia)] = v;
            } else if let Some(cr) = nc.position(r) {
                // K[ia, ib] += A[i, r] W[r, block[ib]] = A[i, r] W[block[ib], r]
                let col = w_nc.col(cr);
                for (ib, j) in block.iter().enumerate() {
                    k[(ia, ib)] += v * col[j];
                }
            } else if v != 0.0 {
                missing.push(r);
            }
        }
    }
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(Error::MissingRows(missing));
    }
    let chol = Cholesky::new(&a11).ok_or_else(|| Error::SingularBlock("diagonal block of A".into()))?;
    let mut rhs = k;
    rhs.scale(-1.0);
    for d in 0..b {
        rhs[(d, d)] += 1.0;
    }
    let mut w11 = chol.solve_matrix(&rhs);
    w11.symmetrize();

    let mut rows = block.as_slice().to_vec();
    rows.extend(nc.iter());
    let mut values = DenseMatrix::zeros(rows.len(), b);
    for kb in 0..b {
        for ka in 0..b {
            values[(ka, kb)] = w11[(ka, kb)];
        }
        for (cr, _) in nc.iter().enumerate() {
            values[(b + cr, kb)] = w_nc.col(cr)[block.as_slice()[kb]];
        }
    }
    Ok(WColumns::from_rows(n, block.as_slice().to_vec(), rows, values))
}

/// Free pairs of one block with their gradient values.
#[derive(Debug, Clone)]
pub struct FreeSetView {
    /// Upper pairs `(p, q)`, `p <= q`, touching the block, sorted.
    pub upper: Vec<(usize, usize)>,
    /// `(S - W)_pq` per pair.
    pub gradient: Vec<f64>,
    /// `A_pq` per pair.
    pub value: Vec<f64>,
    /// Rows outside the block touched by free pairs.
    pub neighborhood: IndexSet,
}

/// Pairs `(r, c)` with `c` in the block and `r` allowed by `nb`, where
/// `A_rc != 0` or `|S_rc - W_rc| > lam`.
pub(crate) fn free_set_with(
    problem: &CovselProblem,
    a: &SparseSymMatrix,
    w: &WColumns,
    nb: &Neighbors,
) -> Result<FreeSetView> {
    let lam = problem.lam;
    let block = IndexSet::from_sorted(w.block.clone())?;
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for (k, c) in block.iter().enumerate() {
        let s = problem.s_column(c);
        let inside = block.iter().take_while(|&r| r <= c);
        let outside = nb.of(c).filter(|&r| !block.contains(r));
        for r in inside.chain(outside) {
            let Some(wrc) = w.get(r, k) else {
                missing.push(r);
                continue;
            };
            let g = s[r] - wrc;
            let v = a.get(r, c);
            if v != 0.0 || g.abs() > lam {
                found.push(((r.min(c), r.max(c)), g, v));
            }
        }
    }
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(Error::MissingRows(missing));
    }
    found.sort_unstable_by_key(|&(p, _, _)| p);
    let neighborhood = IndexSet::from_unsorted(
        found
            .iter()
            .flat_map(|&((p, q), _, _)| [p, q])
            .filter(|&r| !block.contains(r))
            .collect(),
    );
    Ok(FreeSetView {
        upper: found.iter().map(|f| f.0).collect(),
        gradient: found.iter().map(|f| f.1).collect(),
        value: found.iter().map(|f| f.2).collect(),
        neighborhood,
    })
}

/// `W` on the local index set `block ++ neighborhood`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    /// Global indices, block first.
    pub locals: Vec<usize>,
    /// Size of the block.
    pub ni: usize,
    pub w_loc: DenseMatrix,
}

impl BlockSystem {
    /// `extra` holds full columns `extra_cols` of `W`, a superset of the
    /// neighborhood.
    pub fn assemble(
        w_block: &WColumns,
        neighborhood: &IndexSet,
        extra_cols: &IndexSet,
        extra: &DenseMatrix,
    ) -> Result<Self> {
        let ni = w_block.block.len();
        let mut locals = w_block.block.clone();
        locals.extend(neighborhood.iter());
        let l = locals.len();
        let mut col_of = Vec::with_capacity(neighborhood.len());
        for r in neighborhood.iter() {
            col_of.push(
                extra_cols
                    .position(r)
                    .ok_or_else(|| Error::MissingRows(vec![r]))?,
            );
        }
        let get_block = |r: usize, k: usize| w_block.get(r, k).ok_or_else(|| Error::MissingRows(vec![r]));
        let mut w = DenseMatrix::zeros(l, l);
        for b in 0..ni {
            for a in 0..ni {
                w[(a, b)] = 0.5 * (get_block(locals[a], b)? + get_block(locals[b], a)?);
            }
            for a in ni..l {
                let v = get_block(locals[a], b)?;
                w[(a, b)] = v;
                w[(b, a)] = v;
            }
        }
        for b in ni..l {
            for a in ni..=b {
                let v = 0.5 * (extra.col(col_of[b - ni])[locals[a]] + extra.col(col_of[a - ni])[locals[b]]);
                w[(a, b)] = v;
                w[(b, a)] = v;
            }
        }
        Ok(Self { locals, ni, w_loc: w })
    }

    fn local_index(&self, n: usize) -> Vec<usize> {
        let mut pos = vec![NONE; n];
        for (k, &g) in self.locals.iter().enumerate() {
            pos[g] = k;
        }
        pos
    }
}

/// Hessian of the block model in upper-pair variables:
/// `(H z)_v = w_v (W Delta W)_pq` with `w_v = 1` on the diagonal and `2` off it.
struct BlockHessian<'a> {
    w: &'a DenseMatrix,
    vars: &'a [(usize, usize)],
    weights: &'a [f64],
}

impl HessianOperator for BlockHessian<'_> {
    fn dim(&self) -> usize {
        self.vars.len()
    }

    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let l = self.w.rows();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); l];
        for (&(p, q), &zv) in self.vars.iter().zip(z) {
            if zv != 0.0 {
                rows[p].push((q, zv));
                if p != q {
                    rows[q].push((p, zv));
                }
            }
        }
        let active: Vec<usize> = (0..l).filter(|&a| !rows[a].is_empty()).collect();
        let na = active.len();
        if na == 0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        // mt[q][k] = (Delta W)[active[k], q]
        let mut mt = vec![0.0; l * na];
        for (k, &a) in active.iter().enumerate() {
            for &(b, d) in &rows[a] {
                for (q, wbq) in self.w.col(b).iter().enumerate() {
                    mt[q * na + k] += d * wbq;
                }
            }
        }
        // wa[p][k] = W[p, active[k]]
        let mut wa = vec![0.0; l * na];
        for (k, &a) in active.iter().enumerate() {
            for (p, wpa) in self.w.col(a).iter().enumerate() {
                wa[p * na + k] = *wpa;
            }
        }
        out.par_iter_mut().enumerate().for_each(|(v, o)| {
            let (p, q) = self.vars[v];
            let s: f64 = wa[p * na..(p + 1) * na]
                .iter()
                .zip(&mt[q * na..(q + 1) * na])
                .map(|(x, y)| x * y)
                .sum();
            *o = self.weights[v] * s;
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        self.vars
            .iter()
            .map(|&(p, q)| {
                if p == q {
                    self.w[(p, p)] * self.w[(p, p)]
                } else {
                    2.0 * (self.w[(p, p)] * self.w[(q, q)] + self.w[(p, q)] * self.w[(p, q)])
                }
            })
            .collect()
    }
}

/// Newton direction of one block in upper-pair variables.
#[derive(Debug, Clone)]
pub struct BlockDirection {
    /// Global upper pairs.
    pub vars: Vec<(usize, usize)>,
    /// Local pairs into [`BlockSystem::locals`], first index smaller.
    pub local: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
    pub z: Vec<f64>,
}

impl BlockDirection {
    pub fn is_zero(&self) -> bool {
        self.z.iter().all(|v| *v == 0.0)
    }

    /// Nonzero entries as local triplets.
    pub fn local_entries(&self) -> Vec<(usize, usize, f64)> {
        self.local
            .iter()
            .zip(&self.z)
            .filter(|(_, z)| **z != 0.0)
            .map(|(&(a, b), &z)| (a, b, z))
            .collect()
    }
}

/// Minimizes the block's l1-regularized quadratic model over its free pairs
/// with PCD-CG; the Hessian applies `Delta -> W Delta W` on free entries only.
pub fn newton_block_direction(
    problem: &CovselProblem,
    free: &FreeSetView,
    sys: &BlockSystem,
    rel_tol: f64,
    max_sweeps: usize,
) -> Result<BlockDirection> {
    let pos = sys.local_index(problem.n());
    let mut local = Vec::with_capacity(free.upper.len());
    for &(p, q) in &free.upper {
        let (a, b) = (pos[p], pos[q]);
        if a == NONE || b == NONE {
            return Err(Error::MissingRows(vec![if a == NONE { p } else { q }]));
        }
        local.push((a.min(b), a.max(b)));
    }
    let weights: Vec<f64> = free.upper.iter().map(|&(p, q)| if p == q { 1.0 } else { 2.0 }).collect();
    let grad: Vec<f64> = free.gradient.iter().zip(&weights).map(|(g, w)| g * w).collect();
    let hess = BlockHessian {
        w: &sys.w_loc,
        vars: &local,
        weights: &weights,
    };
    let model = QuadraticModel::new(&hess, grad, free.value.clone(), problem.lam)?.with_weights(weights.clone())?;
    let res = pcd_cg_solve(&model, &IndexSet::range(local.len()), rel_tol, max_sweeps)?;
    Ok(BlockDirection {
        vars: free.upper.clone(),
        local,
        weights,
        z: res.z,
    })
}

/// `B(alpha) = B0 + alpha B1 + alpha^2 B2` is the Schur complement of the
/// outside block in `A + alpha Delta`, so that
/// `logdet(A + alpha Delta) - logdet A = logdet B(alpha) - logdet B0`.
#[derive(Debug, Clone)]
pub struct LinesearchMats {
    pub b0: DenseMatrix,
    pub b1: DenseMatrix,
    pub b2: DenseMatrix,
    pub logdet_b0: f64,
}

impl LinesearchMats {
    pub fn at(&self, alpha: f64) -> DenseMatrix {
        self.b0.add_scaled(alpha, &self.b1).add_scaled(alpha * alpha, &self.b2)
    }
}

/// Builds `B0 = W11^{-1}`, `B1 = D11 + T + T^T` with `T = D12 W21 B0`, and
/// `B2 = (D12 W21) B0 (W12 D21) - D12 W22 D21`, from `W` on the local set
/// alone. `delta` lists local upper entries; none may lie outside the block
/// in both indices.
pub fn linesearch_matrices(w_loc: &DenseMatrix, ni: usize, delta: &[(usize, usize, f64)]) -> Result<LinesearchMats> {
    let l = w_loc.rows();
    let w11 = w_loc.select(&(0..ni).collect::<Vec<_>>(), &(0..ni).collect::<Vec<_>>());
    let chol = Cholesky::new(&w11).ok_or_else(|| Error::SingularBlock("W11 is not positive definite".into()))?;
    let b0 = chol.inverse();
    let logdet_b0 = -chol.logdet();

    let mut d11 = DenseMatrix::zeros(ni, ni);
    let mut d12: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ni];
    for &(a, b, d) in delta {
        let (a, b) = (a.min(b), a.max(b));
        if b < ni {
            d11[(a, b)] += d;
            if a != b {
                d11[(b, a)] += d;
            }
        } else if a < ni {
            d12[a].push((b, d));
        } else {
            return Err(Error::InvalidArgument(format!(
                "direction entry ({a}, {b}) outside the block rows and columns"
            )));
        }
    }
    // U = D12 W21 (ni x ni)
    let mut u = DenseMatrix::zeros(ni, ni);
    for (i, row) in d12.iter().enumerate() {
        for &(r, d) in row {
            for k in 0..ni {
                u[(i, k)] += d * w_loc[(r, k)];
            }
        }
    }
    let t = u.matmul(&b0)?;
    let mut b1 = d11.add_scaled(1.0, &t).add_scaled(1.0, &t.transpose());
    b1.symmetrize();

    // X = D12 W22 (ni x l, outside columns only)
    let mut x = DenseMatrix::zeros(ni, l);
    for (i, row) in d12.iter().enumerate() {
        for &(r, d) in row {
            let wr = w_loc.col(r);
            for s in ni..l {
                x[(i, s)] += d * wr[s];
            }
        }
    }
    let mut v = DenseMatrix::zeros(ni, ni);
    for j in 0..ni {
        for &(s, d) in &d12[j] {
            for i in 0..ni {
                v[(i, j)] += x[(i, s)] * d;
            }
        }
    }
    let ub0ut = t.matmul(&u.transpose())?;
    let mut b2 = ub0ut.add_scaled(-1.0, &v);
    b2.symmetrize();
    Ok(LinesearchMats {
        b0,
        b1,
        b2,
        logdet_b0,
    })
}

/// One entry of a block direction as seen by the line search.
#[derive(Debug, Clone, Copy)]
pub struct LineEntry {
    /// `S_pq`.
    pub s: f64,
    /// `A_pq`.
    pub x: f64,
    /// Direction value.
    pub z: f64,
    /// 1 on the diagonal, 2 off it.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStep {
    pub alpha: f64,
    /// Change of `-logdet A + tr(S A)`.
    pub smooth_delta: f64,
    /// Change of `||A||_1`.
    pub l1_delta: f64,
    pub trials: usize,
}

impl BlockStep {
    pub fn objective_delta(&self, lam: f64) -> f64 {
        self.smooth_delta + lam * self.l1_delta
    }
}

/// Change of the objective along the block direction for one step size, or
/// `None` when `A + alpha Delta` is not positive definite.
/// Returns the changes of the smooth part and of `||A||_1`.
pub fn block_objective_delta(mats: &LinesearchMats, entries: &[LineEntry], alpha: f64) -> Option<(f64, f64)> {
    let chol = Cholesky::new(&mats.at(alpha))?;
    let trace: f64 = entries.iter().map(|e| e.weight * e.s * e.z).sum();
    let smooth = -(chol.logdet() - mats.logdet_b0) + alpha * trace;
    let l1: f64 = entries
        .iter()
        .map(|e| e.weight * ((e.x + alpha * e.z).abs() - e.x.abs()))
        .sum();
    Some((smooth, l1))
}

/// Sampled line search over `alpha = 1, 1/2, 1/4, ...` with positive
/// definiteness certified through `B(alpha)`.
pub fn block_linesearch(mats: &LinesearchMats, entries: &[LineEntry], lam: f64) -> Result<BlockStep> {
    if entries.iter().all(|e| e.z == 0.0) {
        return Ok(BlockStep {
            alpha: 1.0,
            smooth_delta: 0.0,
            l1_delta: 0.0,
            trials: 0,
        });
    }
    let eval = |alpha: f64| block_objective_delta(mats, entries, alpha).map(|(s, l)| s + lam * l);
    let LineSearchStep { alpha, trials, .. } = armijo_linesearch(0.0, eval, 0.5, 1.0)?;
    let (smooth_delta, l1_delta) =
        block_objective_delta(mats, entries, alpha).ok_or(Error::NotPositiveDefinite)?;
    Ok(BlockStep {
        alpha,
        smooth_delta,
        l1_delta,
        trials,
    })
}
