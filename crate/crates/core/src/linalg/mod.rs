//! Linear-algebra and proximal primitives shared by every solver.

pub mod cg;
pub mod dense;
pub mod prox;
pub mod sets;
pub mod sparse;

pub use cg::{cg_solve, inverse_columns, CgSolution, InverseColumns};
pub use dense::{dense_chol_logdet, dot, ensure_finite, norm1, norm2, spd_inverse, Cholesky, DenseMatrix, LogDet};
pub use prox::{min_norm_subgradient, min_norm_subgradient_entry, scalar_prox, soft_shrinkage};
pub use sets::{IndexSet, PairSet};
pub use sparse::SparseSymMatrix;
