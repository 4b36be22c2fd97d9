use crate::error::{Error, Result};

/// Labeled samples with sparse features, stored both by sample and by
/// feature.
///
/// With `bias` set, a constant feature equal to 1 is appended at index
/// `features()`; it is excluded from the l1 penalty.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: usize,
    bias: bool,
    labels: Vec<f64>,
    sample_ptr: Vec<usize>,
    sample_idx: Vec<usize>,
    sample_val: Vec<f64>,
    feature_ptr: Vec<usize>,
    feature_idx: Vec<usize>,
    feature_val: Vec<f64>,
    pos: usize,
    neg: usize,
}

impl LabeledDataset {
    /// `samples[i]` lists `(feature, value)` pairs of sample `i`; labels are
    /// `+1` or `-1`. Duplicate features within a sample are summed and zero
    /// values dropped.
    pub fn new(features: usize, samples: Vec<Vec<(usize, f64)>>, labels: Vec<f64>, bias: bool) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} samples but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidArgument(format!("label {} of sample {i} is not +1 or -1", labels[i])));
        }
        let dim = features + usize::from(bias);
        let mut sample_ptr = vec![0];
        let mut sample_idx = Vec::new();
        let mut sample_val = Vec::new();
        for (i, mut row) in samples.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let start = sample_idx.len();
            for (j, v) in row {
                if j >= features {
                    return Err(Error::Dimension(format!("sample {i} has feature {j} >= {features}")));
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite(i));
                }
                if sample_idx.len() > start && sample_idx.last() == Some(&j) {
                    *sample_val.last_mut().expect("nonempty") += v;
                } else {
                    sample_idx.push(j);
                    sample_val.push(v);
                }
            }
            let mut k = start;
            for r in start..sample_idx.len() {
                if sample_val[r] != 0.0 {
                    sample_idx[k] = sample_idx[r];
                    sample_val[k] = sample_val[r];
                    k += 1;
                }
            }
            sample_idx.truncate(k);
            sample_val.truncate(k);
            if bias {
                sample_idx.push(features);
                sample_val.push(1.0);
            }
            sample_ptr.push(sample_idx.len());
        }

        let mut count = vec![0usize; dim + 1];
        for &j in &sample_idx {
            count[j + 1] += 1;
        }
        for j in 0..dim {
            count[j + 1] += count[j];
        }
        let feature_ptr = count.clone();
        let mut feature_idx = vec![0; sample_idx.len()];
        let mut feature_val = vec![0.0; sample_idx.len()];
        for i in 0..labels.len() {
            for k in sample_ptr[i]..sample_ptr[i + 1] {
                let j = sample_idx[k];
                feature_idx[count[j]] = i;
                feature_val[count[j]] = sample_val[k];
                count[j] += 1;
            }
        }
        let pos = labels.iter().filter(|&&y| y > 0.0).count();
        let neg = labels.len() - pos;
        Ok(Self {
            features,
            bias,
            labels,
            sample_ptr,
            sample_idx,
            sample_val,
            feature_ptr,
            feature_idx,
            feature_val,
            pos,
            neg,
        })
    }

    /// Number of input features, without the bias slot.
    pub fn features(&self) -> usize {
        self.features
    }

    /// Number of weights, including the bias slot when present.
    pub fn dim(&self) -> usize {
        self.features + usize::from(self.bias)
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    /// Number of samples.
    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn positives(&self) -> usize {
        self.pos
    }

    pub fn negatives(&self) -> usize {
        self.neg
    }

    /// Stored nonzeros, bias entries included.
    pub fn nnz(&self) -> usize {
        self.sample_idx.len()
    }

    /// Feature indices and values of sample `i`.
    pub fn sample(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.sample_ptr[i]..self.sample_ptr[i + 1];
        (&self.sample_idx[r.clone()], &self.sample_val[r])
    }

    /// Sample indices and values of feature `j`.
    pub fn feature(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.feature_ptr[j]..self.feature_ptr[j + 1];
        (&self.feature_idx[r.clone()], &self.feature_val[r])
    }

    pub fn feature_nnz(&self, j: usize) -> usize {
        self.feature_ptr[j + 1] - self.feature_ptr[j]
    }

    /// l1 weight of weight `j`: zero for the bias slot.
    pub fn penalty(&self, j: usize) -> f64 {
        if self.bias && j == self.features {
            0.0
        } else {
            1.0
        }
    }

    /// Samples and labels without the bias column, as given to [`new`](Self::new).
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.m())
            .map(|i| {
                let (idx, val) = self.sample(i);
                idx.iter()
                    .zip(val)
                    .filter(|(&j, _)| j < self.features)
                    .map(|(&j, &v)| (j, v))
                    .collect()
            })
            .collect()
    }
}
