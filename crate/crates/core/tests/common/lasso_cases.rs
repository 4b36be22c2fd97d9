//! LASSO fixtures shared by the relaxation tests and the acceptance run.

use super::*;
use mlsparse::lasso::LassoProblem;
use mlsparse::linalg::DenseMatrix;
use rand::Rng;

pub fn random_problem(n: usize, lam: f64, seed: u64) -> (Mat, Vec<f64>, LassoProblem) {
    let mut r = rng(seed);
    let h = random_spd(n, 0.2, &mut r);
    let b: Vec<f64> = (0..n).map(|_| 2.0 * normal(&mut r)).collect();
    let p = LassoProblem::new(DenseMatrix::from_rows(&h).unwrap(), b.clone(), lam).unwrap();
    (h, b, p)
}

/// Instance with a known minimizer: `b` is chosen so that the optimality
/// conditions hold at a sparse `x*` with strict slack off the support.
pub fn constructed(n: usize, k: usize, seed: u64) -> (LassoProblem, Vec<f64>) {
    let mut r = rng(seed);
    let h = random_spd(n, 0.5, &mut r);
    let lam = 1.0;
    let mut x = vec![0.0; n];
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = r.random_range(i..n);
        idx.swap(i, j);
        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
        x[idx[i]] = sign * r.random_range(0.5..2.0);
    }
    let hx = matvec(&h, &x);
    let b: Vec<f64> = (0..n)
        .map(|i| {
            if x[i] != 0.0 {
                -hx[i] - lam * x[i].signum()
            } else {
                r.random_range(-0.9..0.9) * lam - hx[i]
            }
        })
        .collect();
    (LassoProblem::new(DenseMatrix::from_rows(&h).unwrap(), b, lam).unwrap(), x)
}
