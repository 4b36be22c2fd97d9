//! Parallel coordinate descent accelerated by nonlinear conjugate gradients.
//!
//! Each sweep computes the PCD direction of the quadratic model at the
//! current inner iterate, mixes it with the previous search direction using a
//! Polak-Ribiere coefficient, and minimizes the (convex, piecewise quadratic)
//! model exactly along the result. One Hessian application per sweep.

use super::model::{prox_coordinate, QuadraticModel};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, IndexSet};

/// Sweeps between forced restarts of the conjugate direction.
const RESTART_EVERY: usize = 10;

#[derive(Debug, Clone)]
pub struct PcdCgResult {
    /// The direction `z`, zero outside the restriction.
    pub z: Vec<f64>,
    /// Model value `phi(z)` after every sweep, starting with `phi(0)`.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl PcdCgResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace starts with phi(0)")
    }
}

/// Approximately minimizes the model over directions supported on
/// `restriction`, stopping once the PCD step norm falls below
/// `rel_tol` times its initial value.
pub fn pcd_cg_solve(
    model: &QuadraticModel<'_>,
    restriction: &IndexSet,
    rel_tol: f64,
    max_sweeps: usize,
) -> Result<PcdCgResult> {
    pcd_cg_solve_with(model, restriction, rel_tol, max_sweeps, true)
}

/// Same iteration without the conjugate-direction memory (plain PCD with an
/// exact line search).
pub fn pcd_solve(
    model: &QuadraticModel<'_>,
    restriction: &IndexSet,
    rel_tol: f64,
    max_sweeps: usize,
) -> Result<PcdCgResult> {
    pcd_cg_solve_with(model, restriction, rel_tol, max_sweeps, false)
}

fn pcd_cg_solve_with(
    model: &QuadraticModel<'_>,
    restriction: &IndexSet,
    rel_tol: f64,
    max_sweeps: usize,
    conjugate: bool,
) -> Result<PcdCgResult> {
    let n = model.dim();
    restriction.check_bounds(n)?;
    let diag = model.hessian.diagonal();
    for i in restriction.iter() {
        if !(diag[i] > 0.0) {
            return Err(Error::NonPositiveDiagonal {
                index: i,
                value: diag[i],
            });
        }
    }
    let active = restriction.as_slice();

    let mut z = vec![0.0; n];
    // gradient of the smooth part of the model at z: g + H z
    let mut r = model.grad.clone();
    let mut hz = vec![0.0; n];
    let mut trace = vec![model.l1_term(&z)];

    let mut d = vec![0.0; n];
    let mut d_prev = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut hs = vec![0.0; n];
    let mut have_prev = false;
    let mut d0 = 0.0;
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        for &i in active {
            d[i] = prox_coordinate(model.base[i] + z[i], r[i], diag[i], model.penalty(i));
        }
        let dnorm = norm2(&d);
        if sweeps == 0 {
            d0 = dnorm;
        }
        if dnorm == 0.0 || dnorm <= rel_tol * d0 {
            converged = true;
            break;
        }

        let mut use_cg = conjugate && have_prev && sweeps % RESTART_EVERY != 0;
        if use_cg {
            let denom = dot(&d_prev, &d_prev);
            let beta = if denom > 0.0 {
                (active.iter().map(|&i| d[i] * (d[i] - d_prev[i])).sum::<f64>() / denom).max(0.0)
            } else {
                0.0
            };
            for &i in active {
                s[i] = d[i] + beta * s[i];
            }
            if directional_slope(model, &z, &r, &s, active) >= 0.0 {
                use_cg = false;
            }
        }
        if !use_cg {
            for &i in active {
                s[i] = d[i];
            }
        }
        let slope = directional_slope(model, &z, &r, &s, active);
        if !(slope < 0.0) {
            // the PCD direction is a descent direction unless we are at the
            // restricted minimizer up to rounding
            converged = true;
            break;
        }

        model.hessian.apply(&s, &mut hs);
        let curvature = dot(&s, &hs);
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let step = exact_line_minimizer(model, &z, &s, active, slope, curvature);
        for &i in active {
            if s[i] == 0.0 {
                continue;
            }
            if step.snap.binary_search(&i).is_ok() {
                z[i] = -model.base[i];
            } else {
                z[i] += step.alpha * s[i];
            }
        }
        for k in 0..n {
            r[k] += step.alpha * hs[k];
            hz[k] += step.alpha * hs[k];
        }
        if !step.snap.is_empty() {
            // snapped coordinates moved by a slightly different amount
            model.hessian.apply(&z, &mut hz);
            for k in 0..n {
                r[k] = model.grad[k] + hz[k];
            }
        }
        let last = *trace.last().expect("trace starts with phi(0)");
        trace.push(last + step.change);
        for &i in active {
            d_prev[i] = d[i];
        }
        have_prev = true;
        sweeps += 1;
    }
    snap_to_kinks(model, &mut z, &r, &mut hz, &diag, active, &mut trace);
    if trace.len() == 1 {
        trace.push(trace[0]);
    }
    Ok(PcdCgResult {
        z,
        objective_trace: trace,
        sweeps,
        converged,
    })
}

/// Conjugate mixing can leave coordinates a rounding error away from zero,
/// where no line search can remove them. Moves every coordinate whose own
/// one-dimensional change `-c r_i + h_ii c^2 / 2 - pen |c|` towards zero is
/// non-positive onto zero, and keeps the result if the model did not grow.
fn snap_to_kinks(
    model: &QuadraticModel<'_>,
    z: &mut [f64],
    r: &[f64],
    hz: &mut [f64],
    diag: &[f64],
    active: &[usize],
    trace: &mut Vec<f64>,
) {
    let snapped: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| {
            let c = model.base[i] + z[i];
            c != 0.0 && -c * r[i] + 0.5 * diag[i] * c * c - model.penalty(i) * c.abs() <= 0.0
        })
        .collect();
    if snapped.is_empty() {
        return;
    }
    let before = *trace.last().expect("trace starts with phi(0)");
    let mut trial = z.to_vec();
    for &i in &snapped {
        trial[i] = -model.base[i];
    }
    let mut h_trial = vec![0.0; z.len()];
    model.hessian.apply(&trial, &mut h_trial);
    let change = model.objective_with_hz(&trial, &h_trial) - model.objective_with_hz(z, hz);
    if change <= 0.0 {
        z.copy_from_slice(&trial);
        hz.copy_from_slice(&h_trial);
        trace.push(before + change);
    }
}

/// Right derivative of `phi(z + t s)` at `t = 0`.
fn directional_slope(
    model: &QuadraticModel<'_>,
    z: &[f64],
    r: &[f64],
    s: &[f64],
    active: &[usize],
) -> f64 {
    let mut slope = 0.0;
    for &i in active {
        let si = s[i];
        if si == 0.0 {
            continue;
        }
        let c = model.base[i] + z[i];
        let abs_slope = if c > 0.0 {
            si
        } else if c < 0.0 {
            -si
        } else {
            si.abs()
        };
        slope += r[i] * si + model.penalty(i) * abs_slope;
    }
    slope
}

struct LineStep {
    alpha: f64,
    /// Model change at `alpha`; never positive.
    change: f64,
    /// Coordinates whose kink lies exactly at `alpha`; they land on zero.
    snap: Vec<usize>,
}

/// Exact minimizer over `t >= 0` of
/// `slope0 * t + curvature * t^2 / 2 + (kink corrections)`,
/// i.e. of `phi(z + t s)` written around `t = 0`.
fn exact_line_minimizer(
    model: &QuadraticModel<'_>,
    z: &[f64],
    s: &[f64],
    active: &[usize],
    slope0: f64,
    curvature: f64,
) -> LineStep {
    // kinks ahead: x_i + z_i + t s_i crosses zero at t > 0
    let mut kinks: Vec<(f64, usize, f64)> = active
        .iter()
        .filter_map(|&i| {
            let si = s[i];
            let c = model.base[i] + z[i];
            if si == 0.0 || c == 0.0 {
                return None;
            }
            let t = -c / si;
            (t > 0.0).then(|| (t, i, 2.0 * model.penalty(i) * si.abs()))
        })
        .collect();
    kinks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut jump = 0.0;
    let mut start = 0.0;
    let mut k = 0;
    while k < kinks.len() {
        let t_k = kinks[k].0;
        let root = -(slope0 + jump) / curvature;
        if root <= t_k {
            let snap = if root <= start && start > 0.0 {
                snap_at(&kinks, start)
            } else {
                Vec::new()
            };
            return line_step(&kinks, slope0, curvature, root.max(start), snap);
        }
        // derivative at the kink from the right
        while k < kinks.len() && kinks[k].0 == t_k {
            jump += kinks[k].2;
            k += 1;
        }
        start = t_k;
        if slope0 + jump + curvature * t_k >= 0.0 {
            return line_step(&kinks, slope0, curvature, t_k, snap_at(&kinks, t_k));
        }
    }
    let alpha = (-(slope0 + jump) / curvature).max(start);
    line_step(&kinks, slope0, curvature, alpha, Vec::new())
}

/// The convex line function is minimized at `alpha`, so its change there is
/// non-positive; clamping removes rounding of that sign.
fn line_step(kinks: &[(f64, usize, f64)], slope0: f64, curvature: f64, alpha: f64, snap: Vec<usize>) -> LineStep {
    let crossed: f64 = kinks.iter().filter(|k| k.0 < alpha).map(|k| k.2 * (alpha - k.0)).sum();
    let change = slope0 * alpha + 0.5 * curvature * alpha * alpha + crossed;
    LineStep {
        alpha,
        change: change.min(0.0),
        snap,
    }
}

fn snap_at(kinks: &[(f64, usize, f64)], t: f64) -> Vec<usize> {
    let mut v: Vec<usize> = kinks.iter().filter(|k| k.0 == t).map(|k| k.1).collect();
    v.sort_unstable();
    v
}
