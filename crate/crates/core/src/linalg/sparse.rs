//! Symmetric sparse matrices in compressed-column form.
//!
//! Both triangles are stored, so column `j` doubles as row `j`. Row indices
//! are strictly increasing within each column and `(i, j)` and `(j, i)` hold
//! bit-identical values.

use std::collections::BTreeMap;

use super::dense::DenseMatrix;
use super::sets::PairSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds from `(i, j, v)` triplets. Each off-diagonal triplet is mirrored;
    /// duplicates (including a triplet and its explicit mirror) are summed once
    /// per unordered pair, so supply each off-diagonal entry only in one
    /// triangle or identically in both. Explicit zeros off the diagonal are
    /// dropped.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut seen_lower: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(i * n + j));
            }
            if i <= j {
                *upper.entry((i, j)).or_insert(0.0) += v;
            } else {
                *seen_lower.entry((j, i)).or_insert(0.0) += v;
            }
        }
        for (k, v) in seen_lower {
            match upper.get(&k) {
                Some(&u) if u != v => {
                    return Err(Error::NotSymmetric { row: k.1, col: k.0 });
                }
                Some(_) => {}
                None => {
                    upper.insert(k, v);
                }
            }
        }
        Ok(Self::from_upper_map(n, &upper))
    }

    /// Builds from a map over upper-triangle keys `(i, j)`, `i <= j`.
    pub fn from_upper_map(n: usize, upper: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &v) in upper {
            if v == 0.0 && i != j {
                continue;
            }
            cols[j].push((i, v));
            if i != j {
                cols[i].push((j, v));
            }
        }
        Self::from_columns(n, cols)
    }

    fn from_columns(n: usize, mut cols: Vec<Vec<(usize, f64)>>) -> Self {
        let mut col_ptr = Vec::with_capacity(n + 1);
        let nnz = cols.iter().map(Vec::len).sum();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for col in &mut cols {
            col.sort_unstable_by_key(|&(i, _)| i);
            for &(i, v) in col.iter() {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        m.check_symmetric(0.0)?;
        let n = m.rows();
        let mut upper = BTreeMap::new();
        for j in 0..n {
            for i in 0..=j {
                let v = m[(i, j)];
                if v != 0.0 || i == j {
                    upper.insert((i, j), v);
                }
            }
        }
        Ok(Self::from_upper_map(n, &upper))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Stored rows and values of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|j| {
            let (rows, _) = self.col(j);
            rows.iter().all(|&i| i == j)
        })
    }

    /// Iterates stored entries `(i, j, v)` with `i <= j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter()
                .zip(vals)
                .take_while(move |(&i, _)| i <= j)
                .map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn support(&self) -> PairSet {
        PairSet::from_pairs(self.upper_entries().map(|(i, j, _)| (i, j)))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
    }

    /// Sum of absolute values over all entries (both triangles).
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Returns `A + alpha * Delta`, where `delta` lists upper-triangle entries
    /// `(i, j, d)` with `i <= j`. Off-diagonal entries that become exactly
    /// zero are removed from the pattern.
    pub fn add_scaled_upper(&self, alpha: f64, delta: &[(usize, usize, f64)]) -> Self {
        let mut upper: BTreeMap<(usize, usize), f64> =
            self.upper_entries().map(|(i, j, v)| ((i, j), v)).collect();
        for &(i, j, d) in delta {
            debug_assert!(i <= j);
            *upper.entry((i, j)).or_insert(0.0) += alpha * d;
        }
        Self::from_upper_map(self.n, &upper)
    }

    /// Like [`add_scaled_upper`](Self::add_scaled_upper) but writes the given
    /// values verbatim instead of adding.
    pub fn with_upper_values(&self, updates: &[(usize, usize, f64)]) -> Self {
        let mut upper: BTreeMap<(usize, usize), f64> =
            self.upper_entries().map(|(i, j, v)| ((i, j), v)).collect();
        for &(i, j, v) in updates {
            debug_assert!(i <= j);
            upper.insert((i, j), v);
        }
        Self::from_upper_map(self.n, &upper)
    }

    /// Checks the structural invariants (sorted rows, exact symmetry).
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.n {
            let (rows, vals) = self.col(j);
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "column {j} rows not strictly increasing"
                )));
            }
            for (&i, &v) in rows.iter().zip(vals) {
                if self.get(j, i) != v {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}
