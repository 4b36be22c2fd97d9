use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;

use crate::datagen::SampleMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix, IndexSet};

/// Columns of the empirical covariance kept in memory by default.
pub const DEFAULT_CACHE_COLUMNS: usize = 4096;

/// `min -logdet A + tr(S A) + lam ||A||_1` over positive definite `A`, with
/// `S` the empirical covariance of normalized samples. `S` is never formed;
/// its columns are computed on demand and cached.
#[derive(Clone)]
pub struct CovselProblem {
    samples: Arc<SampleMatrix>,
    pub lam: f64,
    cache: Arc<Mutex<LruCache<usize, Arc<Vec<f64>>>>>,
}

impl std::fmt::Debug for CovselProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CovselProblem")
            .field("n", &self.n())
            .field("m", &self.m())
            .field("lam", &self.lam)
            .finish()
    }
}

impl CovselProblem {
    /// Requires normalized samples (zero mean, unit population variance).
    pub fn new(samples: SampleMatrix, lam: f64) -> Result<Self> {
        Self::with_cache_columns(samples, lam, DEFAULT_CACHE_COLUMNS)
    }

    pub fn with_cache_columns(samples: SampleMatrix, lam: f64, columns: usize) -> Result<Self> {
        samples.check_normalized()?;
        if !(lam > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lam}")));
        }
        let cap = NonZeroUsize::new(columns.max(1)).expect("nonzero");
        Ok(Self {
            samples: Arc::new(samples),
            lam,
            cache: Arc::new(Mutex::new(LruCache::new(cap))),
        })
    }

    /// Same data and cache, different regularization.
    pub fn with_lambda(&self, lam: f64) -> Result<Self> {
        if !(lam > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lam}")));
        }
        Ok(Self {
            samples: Arc::clone(&self.samples),
            lam,
            cache: Arc::clone(&self.cache),
        })
    }

    pub fn n(&self) -> usize {
        self.samples.n()
    }

    pub fn m(&self) -> usize {
        self.samples.m()
    }

    pub fn samples(&self) -> &SampleMatrix {
        &self.samples
    }

    pub fn s_entry(&self, i: usize, j: usize) -> f64 {
        self.samples.covariance(i, j)
    }

    /// Column `j` of `S`.
    pub fn s_column(&self, j: usize) -> Arc<Vec<f64>> {
        if let Some(c) = self.cache.lock().expect("cache lock").get(&j) {
            return Arc::clone(c);
        }
        let yj = self.samples.row(j);
        let m = self.m() as f64;
        let col: Vec<f64> = (0..self.n()).map(|i| dot(self.samples.row(i), yj) / m).collect();
        let col = Arc::new(col);
        self.cache.lock().expect("cache lock").put(j, Arc::clone(&col));
        col
    }

    /// The block `S[rows, cols]`.
    pub fn empirical_cov_block(&self, rows: &IndexSet, cols: &IndexSet) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (k, j) in cols.iter().enumerate() {
            let c = self.s_column(j);
            for (r, i) in rows.iter().enumerate() {
                out[(r, k)] = c[i];
            }
        }
        out
    }

    /// Upper pairs `(i, j)`, `i < j`, with `|S_ij| > lam`, and their values.
    pub fn large_covariances(&self) -> Vec<((usize, usize), f64)> {
        let mut out = Vec::new();
        for j in 0..self.n() {
            let c = self.s_column(j);
            for (i, &s) in c.iter().enumerate().take(j) {
                if s.abs() > self.lam {
                    out.push(((i, j), s));
                }
            }
        }
        out
    }
}
