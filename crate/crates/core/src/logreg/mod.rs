//! l1-regularized logistic regression.
//!
//! Minimizes `C sum_i log(1 + exp(-y_i <x_i, w>)) + ||w||_1` with coordinate
//! descent (CDN), a proximal Newton method on the free set (GLMNET style),
//! and multilevel versions of both.

mod data;
mod loss;
mod solver;

pub use data::LabeledDataset;
pub use loss::{
    feature_dot, logistic_loss, loss_grad, loss_grad_cached, sigmoid, LogRegModel, LogisticHessian, LossGrad,
    MarginCache, Prediction,
};
pub use solver::{
    cdn_epoch, glmnet_newton_iteration, logreg_converged, newton_coordinate_descent, subgradient_l1, train, Algorithm,
    Inner, InnerSweeps, LogRegConfig, LogRegRelaxation, LogRegRun, LogRegState, RelaxStats,
};
