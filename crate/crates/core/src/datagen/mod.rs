//! Synthetic problems: planar graph Laplacians as ground-truth precision
//! matrices, Gaussian samples drawn from them, and sparse logistic datasets.

mod logistic;
mod planar;
mod samples;

pub use logistic::{synth_logreg, SynthLogreg, SynthLogregSpec};
pub use planar::{laplacian, random_planar_laplacian, PlanarGraphSpec, PlanarLaplacian};
pub use samples::{normalize_rows, sample_from_precision, SampleMatrix};
