//! Relaxations for l1-regularized quadratic models.

mod linesearch;
mod model;
mod pcd_cg;
mod problem;

pub use linesearch::{armijo_linesearch, armijo_linesearch_vec, LineSearchStep, MAX_TRIALS};
pub use model::{shrinkage_direction, spectral_radius_estimate, HessianOperator, QuadraticModel, StepKind};
pub use pcd_cg::{pcd_cg_solve, pcd_solve, PcdCgResult};
pub use problem::{LassoProblem, LassoRelaxation, LassoState, LassoStep};
