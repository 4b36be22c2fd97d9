use crate::error::{Error, Result};

/// Maximum number of step sizes sampled before giving up.
pub const MAX_TRIALS: usize = 40;

/// Outcome of a sampled line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub value: f64,
    /// Number of step sizes evaluated.
    pub trials: usize,
}

/// Samples `alpha0 * beta^i` and returns an approximate minimizer of the
/// objective along the direction.
///
/// `eval(alpha)` returns the objective at `x + alpha z`, or `None` when the
/// point is infeasible (for instance not positive definite). Sampling stops at
/// the first feasible value that exceeds its feasible predecessor; the
/// predecessor is returned when it improves on `f0`. If the sequence never
/// turns upward the best sample below `f0` is returned. When no sampled point
/// is feasible and below `f0`, the search reports stagnation.
pub fn armijo_linesearch(
    f0: f64,
    mut eval: impl FnMut(f64) -> Option<f64>,
    beta: f64,
    alpha0: f64,
) -> Result<LineSearchStep> {
    if !(beta > 0.0 && beta < 1.0) || !(alpha0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "line search needs 0 < beta < 1 and alpha0 > 0, got beta={beta}, alpha0={alpha0}"
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut alpha = alpha0;
    for trial in 1..=MAX_TRIALS {
        let value = eval(alpha).filter(|v| v.is_finite());
        if let Some(v) = value {
            if let Some((pa, pv)) = prev {
                if v > pv && pv < f0 {
                    return Ok(LineSearchStep {
                        alpha: pa,
                        value: pv,
                        trials: trial,
                    });
                }
            }
            if v < f0 && best.is_none_or(|(_, bv)| v < bv) {
                best = Some((alpha, v));
            }
        }
        prev = value.map(|v| (alpha, v));
        alpha *= beta;
    }
    match best {
        Some((alpha, value)) => Ok(LineSearchStep {
            alpha,
            value,
            trials: MAX_TRIALS,
        }),
        None => Err(Error::Stagnation { trials: MAX_TRIALS }),
    }
}

/// Line search for `F(x + alpha z)` over plain vectors, with an optional
/// feasibility guard evaluated on the trial point.
pub fn armijo_linesearch_vec(
    objective: impl Fn(&[f64]) -> f64,
    x: &[f64],
    z: &[f64],
    beta: f64,
    alpha0: f64,
    pd_guard: Option<&dyn Fn(&[f64]) -> bool>,
) -> Result<LineSearchStep> {
    if x.len() != z.len() {
        return Err(Error::Dimension("iterate and direction lengths differ".into()));
    }
    let f0 = objective(x);
    let mut trial = vec![0.0; x.len()];
    armijo_linesearch(
        f0,
        |alpha| {
            for i in 0..x.len() {
                trial[i] = x[i] + alpha * z[i];
            }
            if let Some(guard) = pd_guard {
                if !guard(&trial) {
                    return None;
                }
            }
            Some(objective(&trial))
        },
        beta,
        alpha0,
    )
}
