//! Sparse inverse covariance estimation.
//!
//! Minimizes `-log det A + tr(S A) + lam * ||A||_1` over symmetric positive
//! definite `A`, where `S` is the empirical covariance of normalized samples.
//! Columns of `S` are computed on demand and cached, so `S` is never formed.

mod bcd;
mod block;
mod partition;
mod problem;
mod restrict;
mod solve;
mod state;

pub use bcd::{
    bcd_ic_cycle, check_convergence, converged, subgradient_l1, BcdConfig, ConvergenceCheck, CovselRelaxation,
    CycleStats,
};
pub use block::{
    block_linesearch, block_objective_delta, linesearch_matrices, restricted_w_rows, w_columns, BlockStep, LineEntry,
    LinesearchMats, WColumns,
};
pub use partition::{partition_columns, BlockPlan};
pub use problem::CovselProblem;
pub use restrict::Restriction;
pub use solve::{
    bcd_solve, bisection_levels, continuation_schedule, continuation_solve, dc_solve, ml_bcd_solve, solve,
    CovselConfig, CovselRun, Strategy,
};
pub use state::{exact_objective, CovselState, SweepGradient};
