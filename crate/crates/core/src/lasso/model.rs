use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, soft_shrinkage, DenseMatrix, IndexSet};

/// A symmetric positive definite operator `v -> H v`.
pub trait HessianOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `H v` into `out`.
    fn apply(&self, v: &[f64], out: &mut [f64]);

    fn diagonal(&self) -> Vec<f64>;
}

impl HessianOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matvec(v));
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag()
    }
}

/// The l1-regularized quadratic model around a base point `x`:
///
/// `phi(z) = <g, z> + z^T H z / 2 + sum_i lam * w_i * |x_i + z_i|`
///
/// with unit weights `w_i` unless per-variable weights are supplied.
pub struct QuadraticModel<'a> {
    pub hessian: &'a dyn HessianOperator,
    pub grad: Vec<f64>,
    pub base: Vec<f64>,
    pub lam: f64,
    pub weights: Option<Vec<f64>>,
}

impl<'a> QuadraticModel<'a> {
    pub fn new(hessian: &'a dyn HessianOperator, grad: Vec<f64>, base: Vec<f64>, lam: f64) -> Result<Self> {
        let n = hessian.dim();
        if grad.len() != n || base.len() != n {
            return Err(Error::Dimension(format!(
                "model of dimension {n} with gradient {} and base point {}",
                grad.len(),
                base.len()
            )));
        }
        if !(lam >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative lambda {lam}")));
        }
        Ok(Self {
            hessian,
            grad,
            base,
            lam,
            weights: None,
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.dim() {
            return Err(Error::Dimension("l1 weight vector length".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.hessian.dim()
    }

    /// Effective l1 weight `lam * w_i` of variable `i`.
    #[inline]
    pub fn penalty(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => self.lam * w[i],
            None => self.lam,
        }
    }

    /// `phi(z)`.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let mut hz = vec![0.0; self.dim()];
        self.hessian.apply(z, &mut hz);
        self.objective_with_hz(z, &hz)
    }

    pub(crate) fn objective_with_hz(&self, z: &[f64], hz: &[f64]) -> f64 {
        let smooth = dot(&self.grad, z) + 0.5 * dot(z, hz);
        smooth + self.l1_term(z)
    }

    pub(crate) fn l1_term(&self, z: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| self.penalty(i) * (self.base[i] + z[i]).abs())
            .sum()
    }

    /// Checks `<Hu, v> = <u, Hv>` on two vectors.
    pub fn symmetry_defect(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let (mut hu, mut hv) = (vec![0.0; n], vec![0.0; n]);
        self.hessian.apply(u, &mut hu);
        self.hessian.apply(v, &mut hv);
        (dot(&hu, v) - dot(u, &hv)).abs()
    }
}

/// Diagonal scaling used by a shrinkage step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepKind {
    /// `D = c I` with `c` above the spectral radius of `H`.
    Ssf { c: f64 },
    /// `D = diag(H)`.
    Pcd,
}

impl StepKind {
    /// SSF scaling with `c = 1.05` times a power-iteration estimate of the
    /// spectral radius.
    pub fn ssf_for(h: &dyn HessianOperator) -> Self {
        StepKind::Ssf {
            c: 1.05 * spectral_radius_estimate(h, 20, 0x5eed),
        }
    }
}

/// Power-iteration estimate of the largest eigenvalue of a PSD operator.
pub fn spectral_radius_estimate(h: &dyn HessianOperator, iterations: usize, seed: u64) -> f64 {
    let n = h.dim();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.5).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut hv = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..iterations {
        h.apply(&v, &mut hv);
        estimate = dot(&v, &hv);
        let norm = norm2(&hv);
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, hvi) in v.iter_mut().zip(&hv) {
            *vi = hvi / norm;
        }
    }
    h.apply(&v, &mut hv);
    estimate.max(dot(&v, &hv))
}

/// The closed-form minimizer of the diagonally scaled model:
/// `z = Sh_{lam/D}(x - g/D) - x` on `restriction`, zero elsewhere.
pub fn shrinkage_direction(
    model: &QuadraticModel<'_>,
    kind: StepKind,
    restriction: &IndexSet,
) -> Result<Vec<f64>> {
    let n = model.dim();
    restriction.check_bounds(n)?;
    let diag = match kind {
        StepKind::Pcd => Some(model.hessian.diagonal()),
        StepKind::Ssf { .. } => None,
    };
    let mut z = vec![0.0; n];
    for i in restriction.iter() {
        let d = match (kind, &diag) {
            (StepKind::Ssf { c }, _) => c,
            (StepKind::Pcd, Some(diag)) => diag[i],
            (StepKind::Pcd, None) => unreachable!(),
        };
        if !(d > 0.0) {
            return Err(Error::NonPositiveDiagonal { index: i, value: d });
        }
        z[i] = prox_coordinate(model.base[i], model.grad[i], d, model.penalty(i));
    }
    Ok(z)
}

/// `Sh_{pen/d}(x - g/d) - x`.
#[inline]
pub(crate) fn prox_coordinate(x: f64, g: f64, d: f64, pen: f64) -> f64 {
    soft_shrinkage(x - g / d, pen / d) - x
}
