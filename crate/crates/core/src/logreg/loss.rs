use rayon::prelude::*;

use super::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::lasso::HessianOperator;
use crate::linalg::IndexSet;

/// `log(1 + exp(-s))` without overflow.
#[inline]
pub fn logistic_loss(s: f64) -> f64 {
    (-s).max(0.0) + (-s.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(-s))`.
#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Weights and the loss scale `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub w: Vec<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: f64,
    pub probability: f64,
}

impl LogRegModel {
    pub fn zeros(dim: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
        }
        Ok(Self { w: vec![0.0; dim], c })
    }

    pub fn nnz(&self) -> usize {
        self.w.iter().filter(|v| **v != 0.0).count()
    }

    /// `<x, w>` for sparse `x`; indices past the weights are ignored.
    pub fn decision(&self, idx: &[usize], val: &[f64]) -> f64 {
        idx.iter()
            .zip(val)
            .filter(|(&j, _)| j < self.w.len())
            .map(|(&j, &v)| self.w[j] * v)
            .sum()
    }

    /// Probability of the positive class; ties go to `+1`.
    pub fn predict(&self, idx: &[usize], val: &[f64]) -> Prediction {
        let probability = sigmoid(self.decision(idx, val));
        Prediction {
            label: if probability >= 0.5 { 1.0 } else { -1.0 },
            probability,
        }
    }

    /// Prediction for sample `i` of a dataset, bias included.
    pub fn predict_sample(&self, data: &LabeledDataset, i: usize) -> Prediction {
        let (idx, val) = data.sample(i);
        self.predict(idx, val)
    }

    /// `sum_j penalty_j |w_j|`.
    pub fn l1(&self, data: &LabeledDataset) -> f64 {
        self.w.iter().enumerate().map(|(j, v)| data.penalty(j) * v.abs()).sum()
    }
}

/// `y_i <x_i, w>` per sample, stamped with the weight version it matches.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginCache {
    pub margins: Vec<f64>,
    pub version: u64,
}

impl MarginCache {
    pub fn new(model: &LogRegModel, data: &LabeledDataset) -> Self {
        let margins = (0..data.m())
            .into_par_iter()
            .map(|i| {
                let (idx, val) = data.sample(i);
                data.label(i) * model.decision(idx, val)
            })
            .collect();
        Self { margins, version: 0 }
    }

    /// Adds `step * x_j` to `w` in margin space.
    pub fn add_feature(&mut self, data: &LabeledDataset, j: usize, step: f64) {
        let (idx, val) = data.feature(j);
        for (&i, &v) in idx.iter().zip(val) {
            self.margins[i] += step * data.label(i) * v;
        }
        self.version += 1;
    }

    /// Largest deviation from margins recomputed from scratch.
    pub fn max_error(&self, model: &LogRegModel, data: &LabeledDataset) -> f64 {
        let fresh = MarginCache::new(model, data);
        self.margins
            .iter()
            .zip(&fresh.margins)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `C sum_i log(1 + exp(-margin_i))`.
    pub fn loss(&self, c: f64) -> f64 {
        c * self.margins.par_iter().map(|&s| logistic_loss(s)).sum::<f64>()
    }

    /// `C (tau(margin_i) - 1) y_i`, the per-sample gradient coefficients.
    pub fn gradient_coefficients(&self, data: &LabeledDataset, c: f64) -> Vec<f64> {
        self.margins
            .par_iter()
            .enumerate()
            .map(|(i, &s)| c * (sigmoid(s) - 1.0) * data.label(i))
            .collect()
    }

    /// `C tau_i (1 - tau_i)`, the scaled Hessian weights.
    pub fn hessian_weights(&self, c: f64) -> Vec<f64> {
        self.margins
            .par_iter()
            .map(|&s| {
                let t = sigmoid(s);
                c * t * (1.0 - t)
            })
            .collect()
    }
}

/// Gradient entry `j` from per-sample coefficients.
#[inline]
pub fn feature_dot(data: &LabeledDataset, j: usize, coef: &[f64]) -> f64 {
    let (idx, val) = data.feature(j);
    idx.iter().zip(val).map(|(&i, &v)| coef[i] * v).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Loss and gradient of the smooth part at `model`.
pub fn loss_grad(model: &LogRegModel, data: &LabeledDataset) -> Result<LossGrad> {
    if model.w.len() != data.dim() {
        return Err(Error::Dimension(format!(
            "{} weights for {} features",
            model.w.len(),
            data.dim()
        )));
    }
    let cache = MarginCache::new(model, data);
    Ok(loss_grad_cached(&cache, data, model.c))
}

pub fn loss_grad_cached(cache: &MarginCache, data: &LabeledDataset, c: f64) -> LossGrad {
    let coef = cache.gradient_coefficients(data, c);
    let grad = (0..data.dim()).into_par_iter().map(|j| feature_dot(data, j, &coef)).collect();
    LossGrad {
        loss: cache.loss(c),
        grad,
    }
}

/// `C X_S D X_S^T + ridge I` on the weights in `subset`, in subset
/// coordinates.
pub struct LogisticHessian<'a> {
    data: &'a LabeledDataset,
    weights: Vec<f64>,
    subset: IndexSet,
    local: Vec<usize>,
    ridge: f64,
}

const NONE: usize = usize::MAX;

impl<'a> LogisticHessian<'a> {
    pub fn new(data: &'a LabeledDataset, cache: &MarginCache, c: f64, subset: IndexSet, ridge: f64) -> Result<Self> {
        subset.check_bounds(data.dim())?;
        let mut local = vec![NONE; data.dim()];
        for (k, j) in subset.iter().enumerate() {
            local[j] = k;
        }
        Ok(Self {
            data,
            weights: cache.hessian_weights(c),
            subset,
            local,
            ridge,
        })
    }

    pub fn subset(&self) -> &IndexSet {
        &self.subset
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// `C tau_i (1 - tau_i)` per sample.
    pub fn sample_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `X_S^T v` per sample.
    pub fn sample_products(&self, v: &[f64]) -> Vec<f64> {
        (0..self.data.m())
            .into_par_iter()
            .map(|i| {
                let (idx, val) = self.data.sample(i);
                idx.iter()
                    .zip(val)
                    .filter(|(&j, _)| self.local[j] != NONE)
                    .map(|(&j, &x)| x * v[self.local[j]])
                    .sum()
            })
            .collect()
    }
}

impl HessianOperator for LogisticHessian<'_> {
    fn dim(&self) -> usize {
        self.subset.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let t: Vec<f64> = self.sample_products(v).iter().zip(&self.weights).map(|(a, b)| a * b).collect();
        out.par_iter_mut()
            .zip(self.subset.as_slice().par_iter())
            .zip(v.par_iter())
            .for_each(|((o, &j), &vj)| *o = feature_dot(self.data, j, &t) + self.ridge * vj);
    }

    fn diagonal(&self) -> Vec<f64> {
        self.subset
            .as_slice()
            .par_iter()
            .map(|&j| {
                let (idx, val) = self.data.feature(j);
                idx.iter().zip(val).map(|(&i, &x)| self.weights[i] * x * x).sum::<f64>() + self.ridge
            })
            .collect()
    }
}
