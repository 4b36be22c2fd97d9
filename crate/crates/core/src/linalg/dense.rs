//! Small dense matrices in column-major order.
//!
//! These back the per-block quantities of the covariance solver (the
//! `|I_j| x |I_j|` line-search matrices, local blocks of the inverse) and the
//! sampling Cholesky factor of the data generator. Nothing here is meant for
//! large `n`.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let ocol = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in ocol.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for (d, &a) in dst.iter_mut().zip(acol) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `self + alpha * other`, elementwise.
    pub fn add_scaled(&self, alpha: f64, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + alpha * b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// Replaces the matrix by `(M + M^T) / 2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        for j in 0..self.cols {
            for i in 0..j {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Checks symmetry to a relative tolerance of the largest entry.
    pub fn check_symmetric(&self, rel_tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for j in 0..self.cols {
            for i in 0..j {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Selects the sub-matrix with the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row-major; row i holds L[i][0..=i] in its first i + 1 slots
    rows: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric matrix, reading only its lower triangle.
    /// Returns `None` when a pivot is not strictly positive.
    pub fn new(m: &DenseMatrix) -> Option<Self> {
        assert!(m.is_square(), "Cholesky needs a square matrix");
        let n = m.rows();
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s = m[(i, j)] - dot(&rows[i * n..i * n + j], &rows[j * n..j * n + j]);
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    rows[i * n + i] = s.sqrt();
                } else {
                    rows[i * n + j] = s / rows[j * n + j];
                }
            }
        }
        Some(Self { n, rows })
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.n + j]
    }

    pub fn factor(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| if j <= i { self.l(i, j) } else { 0.0 })
    }

    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l(i, i).ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let s = b[i] - dot(&self.rows[i * n..i * n + i], &b[..i]);
            b[i] = s / self.l(i, i);
        }
    }

    /// Solves `L^T x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            b[i] /= self.l(i, i);
            let bi = b[i];
            let row = &self.rows[i * n..i * n + i];
            for (bk, lik) in b[..i].iter_mut().zip(row) {
                *bk -= lik * bi;
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.solve_lower_in_place(b);
        self.solve_upper_in_place(b);
    }

    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = b.clone();
        for j in 0..out.cols() {
            self.solve_in_place(out.col_mut(j));
        }
        out
    }

    pub fn inverse(&self) -> DenseMatrix {
        let mut inv = self.solve_matrix(&DenseMatrix::identity(self.n));
        inv.symmetrize();
        inv
    }
}

/// Result of [`dense_chol_logdet`]; `logdet` is only meaningful when `pd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub logdet: f64,
    pub pd: bool,
}

/// Log-determinant through a Cholesky factorization.
///
/// Asymmetric input (beyond `1e-12` relative to the largest entry) is
/// rejected. A failed factorization is reported as `pd = false`, not as an
/// error, so line searches can use it as a feasibility test.
pub fn dense_chol_logdet(m: &DenseMatrix) -> Result<LogDet> {
    m.check_symmetric(1e-12)?;
    Ok(match Cholesky::new(m) {
        Some(c) => LogDet {
            logdet: c.logdet(),
            pd: true,
        },
        None => LogDet {
            logdet: f64::NAN,
            pd: false,
        },
    })
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::new(m)
        .map(|c| c.inverse())
        .ok_or(Error::NotPositiveDefinite)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// Rejects vectors holding NaN or infinite entries.
pub fn ensure_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logdet_examples() {
        let r = dense_chol_logdet(&DenseMatrix::identity(3)).unwrap();
        assert!(r.pd);
        assert_eq!(r.logdet, 0.0);

        let r = dense_chol_logdet(&DenseMatrix::from_diag(&[2.0, 3.0])).unwrap();
        assert!(r.pd);
        assert!((r.logdet - 6.0_f64.ln()).abs() < 1e-15);

        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!dense_chol_logdet(&m).unwrap().pd);
    }

    #[test]
    fn logdet_rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(
            dense_chol_logdet(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn inverse_of_2x2() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let inv = spd_inverse(&m).unwrap();
        let prod = m.matmul(&inv).unwrap();
        assert!(prod.max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn shape_checks() {
        assert!(DenseMatrix::from_col_major(2, 2, vec![1.0; 3]).is_err());
        assert!(ensure_finite(&[1.0, f64::NAN]).is_err());
    }
}
