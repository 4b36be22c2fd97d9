//! The generic multilevel cycle.
//!
//! A [`Relaxation`] supplies restricted iterations for some l1-regularized
//! problem; [`ml_cycle`] builds a [`SupportHierarchy`] from the current
//! support and gradient magnitudes and traverses it coarse to fine.

mod engine;
mod hierarchy;

pub use engine::{
    ml_cycle, solve_outer, solve_plain, CycleReport, LevelContext, LevelRole, MlConfig, Relaxation, SolveReport,
    TraceRow,
};
pub use hierarchy::{build_hierarchy, build_index_hierarchy, HierarchySeed, SupportHierarchy};
