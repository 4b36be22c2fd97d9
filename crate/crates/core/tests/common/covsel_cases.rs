//! Covariance-selection fixtures shared by the covariance tests and the
//! acceptance run.

use super::*;
use mlsparse::covsel::{restricted_w_rows, w_columns, CovselProblem, LineEntry};
use mlsparse::datagen::{normalize_rows, random_planar_laplacian, sample_from_precision, PlanarGraphSpec};
use mlsparse::linalg::{DenseMatrix, IndexSet, SparseSymMatrix};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sparse(a: &Mat) -> SparseSymMatrix {
    SparseSymMatrix::from_dense(&DenseMatrix::from_rows(a).unwrap()).unwrap()
}

pub fn problem_from_precision(p: &SparseSymMatrix, m: usize, seed: u64, lam: f64) -> CovselProblem {
    let raw = sample_from_precision(p, m, seed).unwrap();
    CovselProblem::new(normalize_rows(&raw).unwrap(), lam).unwrap()
}

pub fn dense_cov(problem: &CovselProblem) -> Mat {
    let s = problem.samples();
    covariance(&(0..s.n()).map(|i| s.row(i).to_vec()).collect::<Vec<_>>())
}

pub fn dense_objective(a: &Mat, s: &Mat, lam: f64) -> Option<f64> {
    let n = a.len();
    let tr: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| s[i][j] * a[j][i]).sum();
    let l1: f64 = a.iter().flatten().map(|v| v.abs()).sum();
    logdet(a).map(|ld| -ld + tr + lam * l1)
}

pub fn shuffled(n: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(r);
    v
}

/// Random PD matrix, a block, a set of outside rows and a direction on the
/// block's rows and columns restricted to those outside rows.
pub struct SchurCase {
    pub a: Mat,
    pub w: Mat,
    pub block: Vec<usize>,
    pub outside: Vec<usize>,
    /// Full symmetric direction.
    pub delta: Mat,
    /// Local upper entries of the direction.
    pub local: Vec<(usize, usize, f64)>,
}

pub fn schur_case(n: usize, nb: usize, seed: u64) -> SchurCase {
    let mut r = rng(seed);
    let a = random_spd(n, 0.3, &mut r);
    let w = inverse(&a);
    let perm = shuffled(n, &mut r);
    let block: Vec<usize> = perm[..nb].to_vec();
    let rest = &perm[nb..];
    let no = r.random_range(1..=rest.len());
    let outside: Vec<usize> = rest[..no].to_vec();
    let local_ids: Vec<usize> = block.iter().chain(&outside).copied().collect();
    let mut delta = zeros(n, n);
    let mut local = Vec::new();
    for p in 0..nb {
        for q in p..local_ids.len() {
            if r.random::<f64>() < 0.6 {
                let v = 0.3 * normal(&mut r);
                let (i, j) = (local_ids[p], local_ids[q]);
                delta[i][j] = v;
                delta[j][i] = v;
                local.push((p, q, v));
            }
        }
    }
    SchurCase {
        a,
        w,
        block,
        outside,
        delta,
        local,
    }
}

pub fn w_local(c: &SchurCase) -> DenseMatrix {
    let ids: Vec<usize> = c.block.iter().chain(&c.outside).copied().collect();
    DenseMatrix::from_rows(&select(&c.w, &ids, &ids)).unwrap()
}

pub fn to_mat(d: &DenseMatrix) -> Mat {
    (0..d.rows()).map(|i| (0..d.cols()).map(|j| d[(i, j)]).collect()).collect()
}

pub fn schur_direct(c: &SchurCase) -> [Mat; 3] {
    let n = c.a.len();
    let comp: Vec<usize> = (0..n).filter(|i| !c.block.contains(i)).collect();
    let a22inv = inverse(&select(&c.a, &comp, &comp));
    let a12 = select(&c.a, &c.block, &comp);
    let d12 = select(&c.delta, &c.block, &comp);
    let b0 = sub(&select(&c.a, &c.block, &c.block), &matmul(&matmul(&a12, &a22inv), &transpose(&a12)));
    let cross = matmul(&matmul(&d12, &a22inv), &transpose(&a12));
    let b1 = sub(&sub(&select(&c.delta, &c.block, &c.block), &cross), &transpose(&cross));
    let b2 = sub(&zeros(c.block.len(), c.block.len()), &matmul(&matmul(&d12, &a22inv), &transpose(&d12)));
    [b0, b1, b2]
}

pub fn rel_err(a: &Mat, b: &Mat) -> f64 {
    max_abs_diff(a, b) / max_abs(b).max(1.0)
}

pub fn line_entries(c: &SchurCase, s: &Mat) -> Vec<LineEntry> {
    let ids: Vec<usize> = c.block.iter().chain(&c.outside).copied().collect();
    c.local
        .iter()
        .map(|&(p, q, z)| {
            let (i, j) = (ids[p], ids[q]);
            LineEntry {
                s: s[i][j],
                x: c.a[i][j],
                z,
                weight: if i == j { 1.0 } else { 2.0 },
            }
        })
        .collect()
}

pub fn random_cov(n: usize, r: &mut ChaCha8Rng) -> Mat {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3 * n).map(|_| normal(r)).collect()).collect();
    covariance(&rows)
}

/// Neighbors of `block` through nonzero entries of `a`.
pub fn neighborhood(a: &Mat, block: &[usize]) -> Vec<usize> {
    let n = a.len();
    (0..n)
        .filter(|j| !block.contains(j) && block.iter().any(|&i| a[i][*j] != 0.0))
        .collect()
}

pub fn restricted_rows_error(n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let a = random_sparse_spd(n, 3.0 / n as f64, &mut r);
    let nb = r.random_range(1..=4.min(n - 1));
    let block = IndexSet::from_unsorted(shuffled(n, &mut r)[..nb].to_vec());
    let nc = IndexSet::from_unsorted(neighborhood(&a, block.as_slice()));
    let asp = sparse(&a);
    let (w_nc, _) = w_columns(&asp, &nc, 1e-12).unwrap();
    let got = restricted_w_rows(&asp, &block, &nc, &w_nc).unwrap();
    let (w_block, _) = w_columns(&asp, &block, 1e-12).unwrap();
    let mut err: f64 = 0.0;
    for k in 0..nb {
        for row in block.iter().chain(nc.iter()) {
            let v = got.get(row, k).expect("row recovered");
            err = err.max((v - w_block[(row, k)]).abs());
        }
    }
    err
}

pub fn small_problem(n: usize, lam: f64, seed: u64) -> (CovselProblem, Mat) {
    let mut r = rng(seed);
    let p = random_sparse_spd(n, 0.4, &mut r);
    let problem = problem_from_precision(&sparse(&p), 60, seed, lam);
    let s = dense_cov(&problem);
    (problem, s)
}

pub fn covsel_gradient_error(n: usize, seed: u64) -> f64 {
    let (problem, s) = small_problem(n, 0.1, seed);
    let mut r = rng(seed + 1);
    let a = random_sparse_spd(n, 0.3, &mut r);
    let (w, _) = w_columns(&sparse(&a), &IndexSet::range(n), 1e-13).unwrap();
    let smooth = |m: &Mat| dense_objective(m, &s, 0.0).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for q in p..n {
            let g = problem.s_entry(p, q) - w[(p, q)];
            let analytic = if p == q { g } else { 2.0 * g };
            let mut plus = a.clone();
            let mut minus = a.clone();
            plus[p][q] += h;
            minus[p][q] -= h;
            if p != q {
                plus[q][p] += h;
                minus[q][p] -= h;
            }
            let fd = (smooth(&plus) - smooth(&minus)) / (2.0 * h);
            worst = worst.max((fd - analytic).abs() / analytic.abs().max(1.0));
        }
    }
    worst
}

/// Min-norm subgradient norm from dense oracles only.
pub fn dense_subgradient_l1(a: &Mat, s: &Mat, lam: f64) -> f64 {
    let w = inverse(a);
    let n = a.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = s[i][j] - w[i][j];
            total += if a[i][j] != 0.0 {
                (g + lam * a[i][j].signum()).abs()
            } else {
                (g.abs() - lam).max(0.0)
            };
        }
    }
    total
}

pub fn planar_problem(n: usize, seed: u64, lam: f64) -> CovselProblem {
    let lap = random_planar_laplacian(PlanarGraphSpec::for_target(n, seed)).unwrap();
    problem_from_precision(&lap.matrix, 200, seed, lam)
}
