//! Reference implementations used as test oracles. They share no code with
//! the library beyond its public types.
#![allow(dead_code)]

pub mod covsel_cases;
pub mod lasso_cases;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn zeros(n: usize, m: usize) -> Mat {
    vec![vec![0.0; m]; n]
}

pub fn eye(n: usize) -> Mat {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    a
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let v = a[i][l];
            if v != 0.0 {
                for j in 0..m {
                    c[i][j] += v * b[l][j];
                }
            }
        }
    }
    c
}

pub fn transpose(a: &Mat) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(p, q)| p - q).collect()).collect()
}

pub fn select(a: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    rows.iter().map(|&i| cols.iter().map(|&j| a[i][j]).collect()).collect()
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Lower Cholesky factor, `None` unless positive definite.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut l = zeros(n, n);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(l)
}

pub fn logdet(a: &Mat) -> Option<f64> {
    cholesky(a).map(|l| (0..a.len()).map(|i| 2.0 * l[i][i].ln()).sum())
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a.iter().zip(eye(n)).map(|(r, e)| r.iter().chain(&e).copied().collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        assert!(d != 0.0, "singular matrix");
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    let pivot = m[c].clone();
                    for (v, pv) in m[r].iter_mut().zip(&pivot) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Random symmetric positive definite matrix `B B^T / k + shift I`.
pub fn random_spd(n: usize, shift: f64, r: &mut ChaCha8Rng) -> Mat {
    let k = n + 2;
    let b: Mat = (0..n).map(|_| (0..k).map(|_| normal(r)).collect()).collect();
    let mut a = matmul(&b, &transpose(&b));
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v /= k as f64;
        }
        row[i] += shift;
    }
    a
}

/// Sparse random symmetric diagonally dominant matrix with density `p`.
pub fn random_sparse_spd(n: usize, p: f64, r: &mut ChaCha8Rng) -> Mat {
    let mut a = zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            if r.random::<f64>() < p {
                let v = r.random_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
        a[i][i] = off + r.random_range(0.5..1.5);
    }
    a
}

pub fn soft(t: f64, lam: f64) -> f64 {
    t.signum() * (t.abs() - lam).max(0.0)
}

/// `x^T H x / 2 + b^T x + lam ||x||_1`.
pub fn lasso_objective(h: &Mat, b: &[f64], lam: f64, x: &[f64]) -> f64 {
    0.5 * dot(x, &matvec(h, x)) + dot(b, x) + lam * x.iter().map(|v| v.abs()).sum::<f64>()
}

fn power_norm(h: &Mat) -> f64 {
    let n = h.len();
    let mut v = vec![1.0; n];
    let mut est = 0.0;
    for _ in 0..200 {
        let hv = matvec(h, &v);
        est = hv.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = hv.iter().map(|x| x / est).collect();
    }
    est
}

/// Accelerated proximal gradient with restarts, run until the proximal
/// gradient mapping is below `tol` or `max_iter` steps.
pub fn fista_lasso(h: &Mat, b: &[f64], lam: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let step = 1.0 / (1.01 * power_norm(h));
    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = lasso_objective(h, b, lam, &x);
    for _ in 0..max_iter {
        let g: Vec<f64> = matvec(h, &y).iter().zip(b).map(|(p, q)| p + q).collect();
        let xn: Vec<f64> = (0..n).map(|i| soft(y[i] - step * g[i], step * lam)).collect();
        let fxn = lasso_objective(h, b, lam, &xn);
        let gap = xn.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / step;
        if gap < tol {
            return if fxn <= fx { xn } else { x };
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if fxn > fx {
            if t == 1.0 {
                break;
            }
            y = x.clone();
            t = 1.0;
            continue;
        }
        y = (0..n).map(|i| xn[i] + (t - 1.0) / tn * (xn[i] - x[i])).collect();
        x = xn;
        fx = fxn;
        t = tn;
    }
    x
}

/// Largest min-norm subgradient entry of a LASSO objective.
pub fn lasso_kkt(h: &Mat, b: &[f64], lam: f64, x: &[f64]) -> f64 {
    let g: Vec<f64> = matvec(h, x).iter().zip(b).map(|(p, q)| p + q).collect();
    (0..x.len())
        .map(|i| {
            if x[i] != 0.0 {
                (g[i] + lam * x[i].signum()).abs()
            } else {
                (g[i].abs() - lam).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Dense rows, labels and the loss weight of an l1 logistic problem with an
/// optional unpenalized last weight.
pub struct DenseLogreg {
    pub x: Mat,
    pub y: Vec<f64>,
    pub c: f64,
    pub free_last: bool,
}

fn log1pexp(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

impl DenseLogreg {
    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn penalty(&self, j: usize) -> f64 {
        if self.free_last && j + 1 == self.dim() {
            0.0
        } else {
            1.0
        }
    }

    pub fn loss(&self, w: &[f64]) -> f64 {
        self.c * self.x.iter().zip(&self.y).map(|(r, &y)| log1pexp(-y * dot(r, w))).sum::<f64>()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        self.loss(w) + (0..w.len()).map(|j| self.penalty(j) * w[j].abs()).sum::<f64>()
    }

    pub fn grad(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        for (r, &y) in self.x.iter().zip(&self.y) {
            let s = y * dot(r, w);
            let coef = -y / (1.0 + s.exp());
            for (gj, xj) in g.iter_mut().zip(r) {
                *gj += self.c * coef * xj;
            }
        }
        g
    }

    pub fn subgradient_l1(&self, w: &[f64]) -> f64 {
        let g = self.grad(w);
        (0..w.len())
            .map(|j| {
                let p = self.penalty(j);
                if w[j] != 0.0 {
                    (g[j] + p * w[j].signum()).abs()
                } else {
                    (g[j].abs() - p).max(0.0)
                }
            })
            .sum()
    }

    /// Accelerated proximal gradient with backtracking and restarts.
    pub fn minimize(&self, tol: f64, max_iter: usize) -> Vec<f64> {
        let n = self.dim();
        let fro: f64 = self.x.iter().flatten().map(|v| v * v).sum();
        let step = 4.0 / (self.c * fro);
        let mut x = vec![0.0; n];
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut fx = self.objective(&x);
        for _ in 0..max_iter {
            let g = self.grad(&y);
            let xn: Vec<f64> = (0..n).map(|j| soft(y[j] - step * g[j], step * self.penalty(j))).collect();
            let fxn = self.objective(&xn);
            if fxn > fx {
                if t == 1.0 {
                    // a plain step from x no longer decreases: x is as good as rounding allows
                    break;
                }
                y = x.clone();
                t = 1.0;
                continue;
            }
            let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = (0..n).map(|j| xn[j] + (t - 1.0) / tn * (xn[j] - x[j])).collect();
            x = xn;
            fx = fxn;
            t = tn;
            if self.subgradient_l1(&x) < tol {
                break;
            }
        }
        x
    }
}

/// Sample covariance `(1/m) Y Y^T` of row-major samples.
pub fn covariance(rows: &[Vec<f64>]) -> Mat {
    let n = rows.len();
    let m = rows[0].len() as f64;
    let mut s = zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = dot(&rows[i], &rows[j]) / m;
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}
