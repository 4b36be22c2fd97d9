//! Scalar proximal maps of the l1 norm.

use crate::error::{Error, Result};

/// `sign(t) * max(0, |t| - lam)`.
#[inline]
pub fn soft_shrinkage(t: f64, lam: f64) -> f64 {
    debug_assert!(lam >= 0.0);
    if t > lam {
        t - lam
    } else if t < -lam {
        t + lam
    } else {
        0.0
    }
}

/// Minimizer of `a z^2 / 2 + b z + lam |z|` over `z`.
pub fn scalar_prox(a: f64, b: f64, lam: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scalar_prox needs a > 0, got {a}"
        )));
    }
    Ok(-soft_shrinkage(b, lam) / a)
}

/// Smallest-magnitude element of `grad + lam * d|x|_1`, componentwise.
pub fn min_norm_subgradient(grad: &[f64], x: &[f64], lam: f64) -> Vec<f64> {
    assert_eq!(grad.len(), x.len(), "gradient and iterate lengths differ");
    grad.iter()
        .zip(x)
        .map(|(&g, &xi)| min_norm_subgradient_entry(g, xi, lam))
        .collect()
}

#[inline]
pub fn min_norm_subgradient_entry(g: f64, x: f64, lam: f64) -> f64 {
    if x > 0.0 {
        g + lam
    } else if x < 0.0 {
        g - lam
    } else {
        soft_shrinkage(g, lam)
    }
}
