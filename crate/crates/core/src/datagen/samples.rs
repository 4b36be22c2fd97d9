use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, SparseSymMatrix};

/// `n` variables by `m` samples, stored row by row (one row per variable).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    m: usize,
    data: Vec<f64>,
    normalized: bool,
}

impl SampleMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("sample rows of unequal length".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self {
            n,
            m,
            data,
            normalized: false,
        })
    }

    pub fn from_row_major(n: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * m {
            return Err(Error::Dimension(format!("{} values for {n}x{m} samples", data.len())));
        }
        Ok(Self {
            n,
            m,
            data,
            normalized: false,
        })
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of samples.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Checks zero mean (1e-10) and unit population variance (1e-8) per row.
    pub fn check_normalized(&self) -> Result<()> {
        let m = self.m as f64;
        for i in 0..self.n {
            let r = self.row(i);
            let mean = r.iter().sum::<f64>() / m;
            let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            if mean.abs() > 1e-10 || (var - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "variable {i} is not normalized (mean {mean:e}, variance {var})"
                )));
            }
        }
        Ok(())
    }

    /// `(1/m) <y_i, y_j>`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j)) / self.m as f64
    }
}

/// Centers every variable and scales it to unit population variance.
pub fn normalize_rows(samples: &SampleMatrix) -> Result<SampleMatrix> {
    if samples.m < 2 {
        return Err(Error::InvalidArgument("normalization needs at least two samples".into()));
    }
    let m = samples.m as f64;
    let mut out = samples.clone();
    for i in 0..samples.n {
        let row = &mut out.data[i * samples.m..(i + 1) * samples.m];
        let mean = row.iter().sum::<f64>() / m;
        row.iter_mut().for_each(|v| *v -= mean);
        let var = row.iter().map(|v| v * v).sum::<f64>() / m;
        if !(var > 0.0) || var.sqrt() <= 1e-12 * (1.0 + mean.abs()) {
            return Err(Error::ZeroVariance(i));
        }
        let sd = var.sqrt();
        row.iter_mut().for_each(|v| *v /= sd);
    }
    out.normalized = true;
    Ok(out)
}

/// Draws `m` samples `y = L^{-T} v` with `v ~ N(0, I)` and `P = L L^T`, so
/// that the covariance of `y` is `P^{-1}`.
pub fn sample_from_precision(p: &SparseSymMatrix, m: usize, seed: u64) -> Result<SampleMatrix> {
    let n = p.dim();
    let chol = Cholesky::new(&p.to_dense()).ok_or(Error::NotPositiveDefinite)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; n * m];
    let mut v = vec![0.0; n];
    for k in 0..m {
        for vi in v.iter_mut() {
            *vi = StandardNormal.sample(&mut rng);
        }
        chol.solve_upper_in_place(&mut v);
        for i in 0..n {
            data[i * m + k] = v[i];
        }
    }
    SampleMatrix::from_row_major(n, m, data)
}
