//! Fiedler vector of the undirected Laplacian `L = D − A`.
//!
//! Computed on the largest connected component with block inverse iteration:
//! a few vectors orthogonal to the constant vector are repeatedly passed
//! through `L⁻¹` (conjugate gradients on `1⊥`, where `L` is positive definite)
//! and refined by a Rayleigh–Ritz step until the lowest Ritz pair has a small
//! residual. Nodes outside the component get 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::DirectedGraph;

const BLOCK: usize = 4;
const MAX_OUTER: usize = 500;

struct Laplacian {
    adj: Vec<Vec<usize>>,
}

impl Laplacian {
    fn n(&self) -> usize {
        self.adj.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, nb) in self.adj.iter().enumerate() {
            let s: f64 = nb.iter().map(|&j| x[j]).sum();
            y[i] = nb.len() as f64 * x[i] - s;
        }
    }

    fn max_degree(&self) -> f64 {
        self.adj.iter().map(Vec::len).max().unwrap_or(0) as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// Solves `L y = b` for `b ⊥ 1`, returning `y ⊥ 1`.
fn conjugate_gradient(lap: &Laplacian, b: &[f64]) -> Vec<f64> {
    let n = lap.n();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    remove_mean(&mut r);
    let b_norm = dot(&r, &r).sqrt();
    if b_norm == 0.0 {
        return x;
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..(20 * n).max(100) {
        lap.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        remove_mean(&mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= 1e-14 * b_norm {
            break;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    remove_mean(&mut x);
    x
}

/// Modified Gram–Schmidt; vectors that collapse are replaced from `rng`.
fn orthonormalize(block: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for k in 0..block.len() {
        for attempt in 0..8 {
            for j in 0..k {
                let proj = dot(&block[k], &block[j]);
                let (head, tail) = block.split_at_mut(k);
                tail[0]
                    .iter_mut()
                    .zip(&head[j])
                    .for_each(|(x, q)| *x -= proj * q);
            }
            remove_mean(&mut block[k]);
            let norm = dot(&block[k], &block[k]).sqrt();
            if norm > 1e-10 || attempt == 7 {
                block[k]
                    .iter_mut()
                    .for_each(|x| *x /= norm.max(f64::MIN_POSITIVE));
                break;
            }
            block[k]
                .iter_mut()
                .for_each(|x| *x = rng.random::<f64>() - 0.5);
        }
    }
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending and the matching eigenvectors as columns.
pub(crate) fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = idx.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|r| idx.iter().map(|&c| v[r][c]).collect())
        .collect();
    (values, vectors)
}

/// Second-smallest eigenpair of a connected Laplacian.
fn fiedler_connected(lap: &Laplacian) -> (f64, Vec<f64>) {
    let n = lap.n();
    let b = BLOCK.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut block: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    orthonormalize(&mut block, &mut rng);

    let tol = 1e-11 * lap.max_degree().max(1.0);
    let mut best = (f64::INFINITY, block[0].clone());
    let mut lv = vec![0.0; n];
    for _ in 0..MAX_OUTER {
        let mut next: Vec<Vec<f64>> = block.iter().map(|x| conjugate_gradient(lap, x)).collect();
        orthonormalize(&mut next, &mut rng);

        let applied: Vec<Vec<f64>> = next
            .iter()
            .map(|x| {
                let mut y = vec![0.0; n];
                lap.apply(x, &mut y);
                y
            })
            .collect();
        let h: Vec<Vec<f64>> = (0..b)
            .map(|i| (0..b).map(|j| dot(&next[i], &applied[j])).collect())
            .collect();
        let h: Vec<Vec<f64>> = (0..b)
            .map(|i| (0..b).map(|j| 0.5 * (h[i][j] + h[j][i])).collect())
            .collect();
        let (values, vectors) = symmetric_eigen(h);
        block = (0..b)
            .map(|c| {
                let mut x = vec![0.0; n];
                for (r, basis) in next.iter().enumerate() {
                    let w = vectors[r][c];
                    x.iter_mut().zip(basis).for_each(|(xi, bi)| *xi += w * bi);
                }
                x
            })
            .collect();
        orthonormalize(&mut block, &mut rng);

        let lambda = values[0];
        lap.apply(&block[0], &mut lv);
        let residual = lv
            .iter()
            .zip(&block[0])
            .map(|(a, x)| (a - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt();
        best = (lambda, block[0].clone());
        if residual < tol {
            break;
        }
    }
    best
}

/// Unit-length Fiedler vector on the largest component, sign fixed so its
/// first non-negligible entry is positive; 0 on every other node.
pub fn fiedler_vector(g: &DirectedGraph) -> Vec<f64> {
    fiedler_with_value(g).1
}

/// Like [`fiedler_vector`], also returning the eigenvalue.
pub fn fiedler_with_value(g: &DirectedGraph) -> (f64, Vec<f64>) {
    let n = g.n_nodes();
    let mut out = vec![0.0; n];
    let nodes = g.largest_weak_component();
    if nodes.len() < 2 {
        return (0.0, out);
    }
    let mut local = vec![usize::MAX; n];
    for (i, &u) in nodes.iter().enumerate() {
        local[u] = i;
    }
    let lap = Laplacian {
        adj: nodes
            .iter()
            .map(|&u| {
                g.undirected_neighbors(u)
                    .into_iter()
                    .map(|v| local[v])
                    .collect()
            })
            .collect(),
    };
    let (lambda, mut v) = fiedler_connected(&lap);
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-9) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    for (i, &u) in nodes.iter().enumerate() {
        out[u] = v[i];
    }
    (lambda, out)
}
