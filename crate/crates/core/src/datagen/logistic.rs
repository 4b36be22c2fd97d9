use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::logreg::{sigmoid, LabeledDataset};

/// Shape of a synthetic logistic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthLogregSpec {
    /// Number of features.
    pub n: usize,
    /// Number of samples.
    pub m: usize,
    /// Fraction of features with a nonzero planted weight.
    pub sparsity: f64,
    /// Probability that a feature is present in a sample.
    pub density: f64,
    /// Planted weights have magnitudes in `[scale, 3 * scale]`.
    pub scale: f64,
    pub seed: u64,
}

impl SynthLogregSpec {
    pub fn new(n: usize, m: usize, sparsity: f64, seed: u64) -> Self {
        Self {
            n,
            m,
            sparsity,
            density: 0.1,
            scale: 1.0,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthLogreg {
    pub data: LabeledDataset,
    pub planted: Vec<f64>,
}

/// Sparse standard-normal features and labels drawn from the logistic model
/// of a planted sparse weight vector.
pub fn synth_logreg(spec: SynthLogregSpec) -> Result<SynthLogreg> {
    let SynthLogregSpec {
        n,
        m,
        sparsity,
        density,
        scale,
        seed,
    } = spec;
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(Error::InvalidArgument(format!("sparsity {sparsity} outside (0, 1]")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!("density {density} outside (0, 1]")));
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("empty dataset requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ((sparsity * n as f64).round() as usize).clamp(1, n);
    let mut planted = vec![0.0; n];
    for j in rand::seq::index::sample(&mut rng, n, k) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        planted[j] = sign * scale * rng.random_range(1.0..=3.0);
    }
    let mut samples = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = Vec::new();
        let mut margin = 0.0;
        for (j, &pj) in planted.iter().enumerate() {
            if rng.random::<f64>() < density {
                let v: f64 = StandardNormal.sample(&mut rng);
                margin += pj * v;
                row.push((j, v));
            }
        }
        labels.push(if rng.random::<f64>() < sigmoid(margin) { 1.0 } else { -1.0 });
        samples.push(row);
    }
    Ok(SynthLogreg {
        data: LabeledDataset::new(n, samples, labels, false)?,
        planted,
    })
}
