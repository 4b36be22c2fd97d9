//! Jacobi-preconditioned conjugate gradients for symmetric positive definite
//! sparse matrices, with independent right-hand sides solved in parallel.

use rayon::prelude::*;

use super::dense::{dot, norm2, DenseMatrix};
use super::sparse::SparseSymMatrix;
use crate::error::{Error, Result};

/// Right-hand sides with a norm below this floor are answered with zero.
const RHS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `A x = b` for each right-hand side to `||Ax - b|| <= rel_tol ||b||`.
///
/// Non-convergence within `max_iter` is reported through
/// [`CgSolution::converged`]; loss of positive curvature is an error.
pub fn cg_solve(
    a: &SparseSymMatrix,
    rhs: &[Vec<f64>],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<CgSolution>> {
    check_tol(rel_tol)?;
    for b in rhs {
        if b.len() != a.dim() {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for a {}-dimensional system",
                b.len(),
                a.dim()
            )));
        }
    }
    let inv_diag = jacobi(a)?;
    rhs.par_iter()
        .map(|b| pcg(a, &inv_diag, b, rel_tol, max_iter))
        .collect()
}

/// Columns `cols` of `A^{-1}`, obtained with unit right-hand sides.
pub fn inverse_columns(
    a: &SparseSymMatrix,
    cols: &[usize],
    rel_tol: f64,
    max_iter: usize,
) -> Result<InverseColumns> {
    check_tol(rel_tol)?;
    let n = a.dim();
    let inv_diag = jacobi(a)?;
    let sols: Vec<CgSolution> = cols
        .par_iter()
        .map(|&c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            pcg(a, &inv_diag, &e, rel_tol, max_iter)
        })
        .collect::<Result<_>>()?;
    let mut w = DenseMatrix::zeros(n, cols.len());
    let mut iterations = Vec::with_capacity(cols.len());
    let mut failed = Vec::new();
    for (k, s) in sols.into_iter().enumerate() {
        w.col_mut(k).copy_from_slice(&s.x);
        iterations.push(s.iterations);
        if !s.converged {
            failed.push(cols[k]);
        }
    }
    Ok(InverseColumns {
        columns: w,
        iterations,
        not_converged: failed,
    })
}

/// Columns of `A^{-1}` with per-column CG iteration counts.
#[derive(Debug, Clone)]
pub struct InverseColumns {
    pub columns: DenseMatrix,
    pub iterations: Vec<usize>,
    pub not_converged: Vec<usize>,
}

impl InverseColumns {
    /// Matrix-vector products spent, one per CG iteration plus the
    /// final residual verification.
    pub fn matvecs(&self) -> u64 {
        self.iterations.iter().map(|&k| k as u64 + 1).sum()
    }

    pub fn into_result(self, requested: &[usize]) -> Result<Self> {
        if self.not_converged.is_empty() {
            Ok(self)
        } else {
            let iterations = self
                .not_converged
                .iter()
                .map(|c| {
                    let k = requested.iter().position(|r| r == c).unwrap_or(0);
                    self.iterations[k]
                })
                .collect();
            Err(Error::CgNotConverged {
                columns: self.not_converged,
                iterations,
            })
        }
    }
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "CG tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    Ok(())
}

fn jacobi(a: &SparseSymMatrix) -> Result<Vec<f64>> {
    a.diag()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::NonPositiveDiagonal { index: i, value: d })
            }
        })
        .collect()
}

fn pcg(
    a: &SparseSymMatrix,
    inv_diag: &[f64],
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm <= RHS_FLOOR {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
        });
    }
    let target = rel_tol * bnorm;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;

    loop {
        if norm2(&r) <= target {
            // the recurrence drifts; confirm against the true residual
            a.matvec(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            if norm2(&r) <= target {
                return Ok(CgSolution {
                    x,
                    iterations,
                    converged: true,
                });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        if iterations >= max_iter {
            return Ok(CgSolution {
                x,
                iterations,
                converged: false,
            });
        }
        a.matvec(&p, &mut ap);
        iterations += 1;
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::CgBreakdown {
                iteration: iterations,
                curvature,
            });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
}
