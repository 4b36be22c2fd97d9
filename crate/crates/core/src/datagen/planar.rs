use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;

/// Random points on the unit square, triangulated and turned into a graph
/// Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanarGraphSpec {
    /// Points drawn before boundary trimming.
    pub points: usize,
    pub seed: u64,
}

impl PlanarGraphSpec {
    pub fn new(points: usize, seed: u64) -> Self {
        Self { points, seed }
    }

    /// Distance from the unit boundary under which points are dropped.
    pub fn margin(&self) -> f64 {
        1.0 / (self.points as f64).sqrt()
    }

    /// Smallest point count whose expected trimmed size reaches `n`.
    pub fn for_target(n: usize, seed: u64) -> Self {
        let mut points = n.max(10);
        while (points as f64) * (1.0 - 2.0 / (points as f64).sqrt()).max(0.0).powi(2) < n as f64 {
            points += 1;
        }
        Self { points, seed }
    }
}

#[derive(Debug, Clone)]
pub struct PlanarLaplacian {
    /// Trimmed Laplacian, positive definite.
    pub matrix: SparseSymMatrix,
    /// Coordinates of the kept points.
    pub coords: Vec<[f64; 2]>,
    /// Number of triangulation edges before trimming.
    pub edges: usize,
}

/// Delaunay triangulation of uniform random points, `-1` per edge and the
/// degree on the diagonal, with rows of points near the boundary removed.
pub fn random_planar_laplacian(spec: PlanarGraphSpec) -> Result<PlanarLaplacian> {
    if spec.points < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 points, got {}",
            spec.points
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pts: Vec<[f64; 2]> = (0..spec.points)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    let mut tri = None;
    for _ in 0..5 {
        match delaunay(&pts) {
            Some(t) => {
                tri = Some(t);
                break;
            }
            None => {
                for p in pts.iter_mut() {
                    p[0] += 1e-9 * (rng.random::<f64>() - 0.5);
                    p[1] += 1e-9 * (rng.random::<f64>() - 0.5);
                }
            }
        }
    }
    let tri = tri.ok_or_else(|| Error::InvalidArgument("degenerate point set".into()))?;
    let edges = triangle_edges(&tri);
    let full = laplacian(spec.points, &edges);

    let m = spec.margin();
    let keep: Vec<usize> = (0..spec.points)
        .filter(|&i| {
            let [x, y] = pts[i];
            x.min(1.0 - x).min(y).min(1.0 - y) >= m
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("no interior points left after trimming".into()));
    }
    let mut new_index = vec![usize::MAX; spec.points];
    for (k, &i) in keep.iter().enumerate() {
        new_index[i] = k;
    }
    let triplets: Vec<(usize, usize, f64)> = full
        .upper_entries()
        .filter(|&(i, j, _)| new_index[i] != usize::MAX && new_index[j] != usize::MAX)
        .map(|(i, j, v)| (new_index[i], new_index[j], v))
        .collect();
    let matrix = SparseSymMatrix::from_triplets(keep.len(), &triplets)?;
    Ok(PlanarLaplacian {
        matrix,
        coords: keep.iter().map(|&i| pts[i]).collect(),
        edges: edges.len(),
    })
}

/// Graph Laplacian of an undirected edge list.
pub fn laplacian(n: usize, edges: &BTreeSet<(usize, usize)>) -> SparseSymMatrix {
    let mut upper = BTreeMap::new();
    let mut degree = vec![0.0; n];
    for &(i, j) in edges {
        upper.insert((i, j), -1.0);
        degree[i] += 1.0;
        degree[j] += 1.0;
    }
    for (i, d) in degree.into_iter().enumerate() {
        upper.insert((i, i), d);
    }
    SparseSymMatrix::from_upper_map(n, &upper)
}

#[derive(Debug, Clone, Copy)]
struct Triangle {
    v: [usize; 3],
    center: [f64; 2],
    radius2: f64,
}

impl Triangle {
    fn new(v: [usize; 3], pts: &[[f64; 2]]) -> Option<Self> {
        let [a, b, c] = v.map(|k| pts[k]);
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        let len2 = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        let scale = len2(a, b).max(len2(b, c)).max(len2(c, a));
        if !(d.abs() > 1e-14 * scale) {
            return None;
        }
        let (a2, b2, c2) = (
            a[0] * a[0] + a[1] * a[1],
            b[0] * b[0] + b[1] * b[1],
            c[0] * c[0] + c[1] * c[1],
        );
        let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
        let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
        let radius2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
        Some(Self {
            v,
            center: [ux, uy],
            radius2,
        })
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2) < self.radius2
    }
}

/// Bowyer-Watson triangulation. Returns `None` when a degenerate triangle
/// appears, so the caller can jitter and retry.
fn delaunay(pts: &[[f64; 2]]) -> Option<Vec<[usize; 3]>> {
    let n = pts.len();
    let mut all = pts.to_vec();
    all.extend_from_slice(&[[-100.0, -100.0], [100.5, -100.0], [0.5, 100.0]]);
    let mut tris = vec![Triangle::new([n, n + 1, n + 2], &all)?];
    for p in 0..n {
        let mut boundary: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut kept = Vec::with_capacity(tris.len() + 2);
        for t in tris {
            if t.contains(all[p]) {
                for (a, b) in [(t.v[0], t.v[1]), (t.v[1], t.v[2]), (t.v[2], t.v[0])] {
                    *boundary.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            } else {
                kept.push(t);
            }
        }
        for ((a, b), count) in boundary {
            if count == 1 {
                kept.push(Triangle::new([a, b, p], &all)?);
            }
        }
        tris = kept;
    }
    Some(
        tris.into_iter()
            .filter(|t| t.v.iter().all(|&k| k < n))
            .map(|t| t.v)
            .collect(),
    )
}

fn triangle_edges(tris: &[[usize; 3]]) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for v in tris {
        for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_center() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let tris = delaunay(&pts).unwrap();
        assert_eq!(tris.len(), 4);
        let e = triangle_edges(&tris);
        assert_eq!(e.len(), 8);
        assert!((0..4).all(|i| e.contains(&(i, 4))));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let edges: BTreeSet<_> = [(0, 1), (1, 2), (0, 2), (2, 3)].into_iter().collect();
        let l = laplacian(4, &edges);
        let mut y = vec![0.0; 4];
        l.matvec(&[1.0; 4], &mut y);
        assert!(y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn target_sizing() {
        let s = PlanarGraphSpec::for_target(800, 0);
        let f = |p: usize| (p as f64) * (1.0 - 2.0 / (p as f64).sqrt()).powi(2);
        assert!(f(s.points) >= 800.0 && f(s.points - 1) < 800.0);
    }
}
