//! Multilevel acceleration for l1-regularized convex optimization.
//!
//! The crate is organized around a generic multilevel cycle
//! ([`multilevel`]) that repeatedly restricts an l1-regularized problem to a
//! nested hierarchy of shrinking variable sets built from the current support
//! and gradient magnitudes. Three problem families plug into it:
//!
//! * [`lasso`]: shrinkage relaxations (SSF, PCD, PCD with nonlinear CG) for
//!   l1-regularized quadratic models,
//! * [`covsel`]: sparse inverse covariance estimation by block coordinate
//!   descent with a Schur-complement line search,
//! * [`logreg`]: l1-regularized logistic regression by CDN and a
//!   proximal-Newton (GLMNET-style) solver.
//!
//! [`datagen`] builds synthetic problems and [`io`] reads and writes the file
//! formats used by the command-line front end.

pub mod covsel;
pub mod datagen;
pub mod error;
pub mod io;
pub mod lasso;
pub mod linalg;
pub mod logreg;
pub mod multilevel;

pub use error::{Error, Result};
