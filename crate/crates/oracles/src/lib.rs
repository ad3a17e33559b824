//! Slow, obviously-correct reference computations on dense adjacency
//! matrices, used as test oracles for the graph measures, adjacency
//! products and gradients of `nodeclass`.
//!
//! Nothing here depends on `nodeclass` itself: graphs are plain
//! `a[u][v] == true` matrices for an edge `u → v`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Adjacency = Vec<Vec<bool>>;

/// Distance marker for unreachable pairs.
pub const UNREACHED: usize = usize::MAX;

/// Random simple digraph with `lo..=hi` nodes and a per-graph edge density
/// drawn from `[0.05, 0.35)`. Returns the node count and the edge list.
pub fn random_edges(seed: u64, lo: usize, hi: usize) -> (usize, Vec<(usize, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(lo..=hi);
    let p = rng.random_range(0.05..0.35);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    (n, edges)
}

/// The 100 random 8 to 20 node digraphs the measures are checked on.
pub fn corpus() -> impl Iterator<Item = (usize, Vec<(usize, usize)>)> {
    (0..100).map(|s| random_edges(1000 + s, 8, 20))
}

pub fn dense(n: usize, edges: &[(usize, usize)]) -> Adjacency {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        a[u][v] = true;
    }
    a
}

pub fn symmetrize(a: &Adjacency) -> Adjacency {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[i][j] || a[j][i]).collect())
        .collect()
}

/// All-pairs hop distances by Floyd–Warshall.
pub fn floyd_warshall(a: &Adjacency) -> Vec<Vec<usize>> {
    let n = a.len();
    let mut d = vec![vec![UNREACHED; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] && i != j {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != UNREACHED && d[k][j] != UNREACHED && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn reachable(d: &[Vec<usize>], s: usize) -> impl Iterator<Item = usize> + '_ {
    (0..d.len()).filter(move |&t| t != s && d[s][t] != UNREACHED)
}

/// `(in_degree, out_degree)` per node.
pub fn degrees(a: &Adjacency) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let out = (0..n)
        .map(|u| a[u].iter().filter(|&&x| x).count() as f64)
        .collect();
    let inc = (0..n)
        .map(|v| (0..n).filter(|&u| a[u][v]).count() as f64)
        .collect();
    (inc, out)
}

/// Mean total degree over the distinct undirected neighbors; 0 if isolated.
pub fn average_neighbor_degree(a: &Adjacency) -> Vec<f64> {
    let n = a.len();
    let (inc, out) = degrees(a);
    let sym = symmetrize(a);
    (0..n)
        .map(|u| {
            let nb: Vec<usize> = (0..n).filter(|&v| sym[u][v]).collect();
            if nb.is_empty() {
                0.0
            } else {
                nb.iter().map(|&v| inc[v] + out[v]).sum::<f64>() / nb.len() as f64
            }
        })
        .collect()
}

/// Every shortest `s → t` path, listed explicitly.
pub fn shortest_paths(a: &Adjacency, d: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(
        a: &Adjacency,
        d: &[Vec<usize>],
        t: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for w in 0..a.len() {
            if a[u][w] && d[w][t] != UNREACHED && d[w][t] + 1 == d[u][t] {
                path.push(w);
                walk(a, d, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if d[s][t] != UNREACHED {
        walk(a, d, t, &mut vec![s], &mut out);
    }
    out
}

/// Unnormalized directed betweenness: each ordered pair spreads one unit
/// evenly over its shortest paths.
pub fn betweenness(a: &Adjacency) -> Vec<f64> {
    let d = floyd_warshall(a);
    let n = a.len();
    let mut g = vec![0.0; n];
    for s in 0..n {
        for t in reachable(&d, s).collect::<Vec<_>>() {
            let paths = shortest_paths(a, &d, s, t);
            let sigma = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    g[v] += 1.0 / sigma;
                }
            }
        }
    }
    g
}

/// Load: one unit sent from `s` towards `t`, split evenly among the
/// shortest-path successors at every hop.
pub fn load(a: &Adjacency) -> Vec<f64> {
    fn push(
        a: &Adjacency,
        d: &[Vec<usize>],
        u: usize,
        t: usize,
        amount: f64,
        load: &mut [f64],
        s: usize,
    ) {
        if u == t {
            return;
        }
        if u != s {
            load[u] += amount;
        }
        let next: Vec<usize> = (0..a.len())
            .filter(|&w| a[u][w] && d[w][t] != UNREACHED && d[w][t] + 1 == d[u][t])
            .collect();
        for &w in &next {
            push(a, d, w, t, amount / next.len() as f64, load, s);
        }
    }
    let d = floyd_warshall(a);
    let n = a.len();
    let mut out = vec![0.0; n];
    for s in 0..n {
        for t in reachable(&d, s).collect::<Vec<_>>() {
            push(a, &d, s, t, 1.0, &mut out, s);
        }
    }
    out
}

/// Measures over the distances from each node to the nodes it reaches.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMeasures {
    pub closeness: Vec<f64>,
    pub eccentricity: Vec<f64>,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
}

pub fn distance_measures(a: &Adjacency) -> DistanceMeasures {
    let d = floyd_warshall(a);
    let n = d.len();
    let mut m = DistanceMeasures {
        closeness: vec![0.0; n],
        eccentricity: vec![0.0; n],
        mean: vec![0.0; n],
        second_moment: vec![0.0; n],
    };
    for s in 0..n {
        let dist: Vec<f64> = reachable(&d, s).map(|t| d[s][t] as f64).collect();
        if dist.is_empty() {
            continue;
        }
        let k = dist.len() as f64;
        m.closeness[s] = k / dist.iter().sum::<f64>();
        m.eccentricity[s] = dist.iter().copied().fold(0.0, f64::max);
        m.mean[s] = dist.iter().sum::<f64>() / k;
        m.second_moment[s] = dist.iter().map(|x| x * x).sum::<f64>() / k;
    }
    m
}

/// Mean ratio of undirected to directed distance over the nodes `s`
/// reaches, or 0 when `s` reaches no more than `threshold` of the largest
/// reachable set.
pub fn flow(a: &Adjacency, threshold: f64) -> Vec<f64> {
    let d = floyd_warshall(a);
    let du = floyd_warshall(&symmetrize(a));
    let n = a.len();
    let reach: Vec<usize> = (0..n).map(|s| reachable(&d, s).count()).collect();
    let max_reach = reach.iter().copied().max().unwrap_or(0);
    (0..n)
        .map(|s| {
            if reach[s] == 0 || (reach[s] as f64 / max_reach as f64) <= threshold {
                return 0.0;
            }
            let sum: f64 = reachable(&d, s)
                .map(|t| du[s][t] as f64 / d[s][t] as f64)
                .sum();
            sum / reach[s] as f64
        })
        .collect()
}

/// Ratio of discounted in-shell to out-shell sizes, each shell normalized
/// by its graph-wide mean. Shells with a zero mean are skipped and a zero
/// denominator gives 0.
pub fn attraction_basin(a: &Adjacency, alpha: f64) -> Vec<f64> {
    let d = floyd_warshall(a);
    let n = d.len();
    let diameter = (0..n)
        .flat_map(|s| reachable(&d, s).map(move |t| (s, t)))
        .map(|(s, t)| d[s][t])
        .max()
        .unwrap_or(0);
    let n_out = |i: usize, m: usize| (0..n).filter(|&v| d[i][v] == m).count() as f64;
    let n_in = |i: usize, m: usize| (0..n).filter(|&v| d[v][i] == m).count() as f64;
    let mean_out: Vec<f64> = (0..=diameter)
        .map(|m| (0..n).map(|i| n_out(i, m)).sum::<f64>() / n as f64)
        .collect();
    let mean_in: Vec<f64> = (0..=diameter)
        .map(|m| (0..n).map(|i| n_in(i, m)).sum::<f64>() / n as f64)
        .collect();
    (0..n)
        .map(|i| {
            let mut num = 0.0;
            let mut den = 0.0;
            for m in 1..=diameter {
                let w = alpha.powi(-(m as i32));
                if mean_in[m] > 0.0 {
                    num += n_in(i, m) / mean_in[m] * w;
                }
                if mean_out[m] > 0.0 {
                    den += n_out(i, m) / mean_out[m] * w;
                }
            }
            if den == 0.0 {
                0.0
            } else {
                num / den
            }
        })
        .collect()
}

/// Core numbers by repeated deletion of nodes whose in+out degree among the
/// survivors is below `k`, for every `k`.
pub fn k_core(a: &Adjacency) -> Vec<f64> {
    let n = a.len();
    let mut core = vec![0.0; n];
    for k in 1..=2 * n {
        let mut alive = vec![true; n];
        loop {
            let mut deg = vec![0usize; n];
            for u in 0..n {
                for v in 0..n {
                    if a[u][v] && alive[u] && alive[v] {
                        deg[u] += 1;
                        deg[v] += 1;
                    }
                }
            }
            let drop: Vec<usize> = (0..n).filter(|&u| alive[u] && deg[u] < k).collect();
            if drop.is_empty() {
                break;
            }
            drop.into_iter().for_each(|u| alive[u] = false);
        }
        for u in 0..n {
            if alive[u] {
                core[u] = k as f64;
            }
        }
    }
    core
}

/// Newman modularity of `membership` on a symmetric adjacency.
pub fn modularity(sym: &Adjacency, membership: &[usize]) -> f64 {
    let n = sym.len();
    let k: Vec<f64> = (0..n)
        .map(|i| sym[i].iter().filter(|&&x| x).count() as f64)
        .collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += f64::from(u8::from(sym[i][j])) - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// L1 distance between `pr` and one step of the damped random walk with
/// dangling mass spread uniformly.
pub fn pagerank_residual(a: &Adjacency, pr: &[f64], damping: f64) -> f64 {
    let n = a.len();
    let out: Vec<usize> = (0..n)
        .map(|u| a[u].iter().filter(|&&x| x).count())
        .collect();
    let dangling: f64 = (0..n).filter(|&u| out[u] == 0).map(|u| pr[u]).sum();
    let mut next = vec![(1.0 - damping) / n as f64 + damping * dangling / n as f64; n];
    for u in 0..n {
        for v in 0..n {
            if a[u][v] {
                next[v] += damping * pr[u] / out[u] as f64;
            }
        }
    }
    pr.iter().zip(&next).map(|(x, y)| (x - y).abs()).sum()
}

/// Laplacian `D − A` of the symmetrized graph restricted to `nodes`.
pub fn laplacian(a: &Adjacency, nodes: &[usize]) -> DMatrix<f64> {
    let sym = symmetrize(a);
    let k = nodes.len();
    DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            nodes.iter().filter(|&&v| sym[nodes[i]][v]).count() as f64
        } else if sym[nodes[i]][nodes[j]] {
            -1.0
        } else {
            0.0
        }
    })
}

/// Eigenpairs of [`laplacian`] sorted by eigenvalue, from a dense solver.
pub fn laplacian_eigenpairs(a: &Adjacency, nodes: &[usize]) -> Vec<(f64, Vec<f64>)> {
    let eig = laplacian(a, nodes).symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..nodes.len())
        .map(|i| {
            (
                eig.eigenvalues[i],
                eig.eigenvectors.column(i).iter().copied().collect(),
            )
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

/// `‖L x − λ x‖₂` for the Laplacian restricted to `nodes`.
pub fn eigen_residual(a: &Adjacency, nodes: &[usize], lambda: f64, x: &[f64]) -> f64 {
    let x = DVector::from_column_slice(x);
    (laplacian(a, nodes) * &x - lambda * &x).norm()
}

/// The nodes of the largest weakly connected component, smallest index
/// first on ties.
pub fn largest_component(a: &Adjacency) -> Vec<usize> {
    let sym = symmetrize(a);
    let n = a.len();
    let mut comp = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut members = vec![s];
        comp[s] = s;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            for v in 0..n {
                if sym[u][v] && comp[v] == usize::MAX {
                    comp[v] = s;
                    members.push(v);
                }
            }
            i += 1;
        }
        if members.len() > best.len() {
            members.sort_unstable();
            best = members;
        }
    }
    best
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in 0..k {
            if !cur.contains(&x) {
                cur.push(x);
                rec(k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut Vec::new(), &mut out);
    out
}

/// Whether `nodes` induce a weakly connected subgraph.
pub fn weakly_connected(a: &Adjacency, nodes: &[usize]) -> bool {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..nodes.len() {
            if !seen[j] && (a[nodes[i]][nodes[j]] || a[nodes[j]][nodes[i]]) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Isomorphism invariant of a small adjacency matrix: the lexicographically
/// largest row-major off-diagonal edge string over all node orderings.
pub fn canonical_form(sub: &Adjacency) -> Vec<bool> {
    canonical_with(sub, &permutations(sub.len()))
}

fn canonical_with(sub: &Adjacency, perms: &[Vec<usize>]) -> Vec<bool> {
    let k = sub.len();
    perms
        .iter()
        .map(|p| {
            (0..k)
                .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| sub[p[i]][p[j]])
                .collect::<Vec<bool>>()
        })
        .max()
        .unwrap()
}

/// Induced connected subgraphs of one isomorphism class.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MotifClass {
    /// Number of node subsets inducing the class.
    pub subgraphs: usize,
    /// Per node, the number of those subsets containing it.
    pub per_node: Vec<f64>,
}

/// Census of the weakly connected induced subgraphs on `size` nodes, keyed
/// by [`canonical_form`]. With `directed == false` the graph is symmetrized
/// first.
pub fn motif_census(a: &Adjacency, size: usize, directed: bool) -> BTreeMap<Vec<bool>, MotifClass> {
    let a = if directed { a.clone() } else { symmetrize(a) };
    let n = a.len();
    let perms = permutations(size);
    let mut census: BTreeMap<Vec<bool>, MotifClass> = BTreeMap::new();
    for set in subsets(n, size) {
        if !weakly_connected(&a, &set) {
            continue;
        }
        let sub: Adjacency = set
            .iter()
            .map(|&i| set.iter().map(|&j| a[i][j]).collect())
            .collect();
        let entry = census
            .entry(canonical_with(&sub, &perms))
            .or_insert_with(|| MotifClass {
                subgraphs: 0,
                per_node: vec![0.0; n],
            });
        entry.subgraphs += 1;
        for &u in &set {
            entry.per_node[u] += 1.0;
        }
    }
    census
}

/// `M_w · x` for a word over `{A, T}` (`T` meaning the transpose), built by
/// explicit dense matrix products from left to right.
pub fn word_product(a: &Adjacency, word: &str, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let entry = |c: char, i: usize, j: usize| match c {
        'A' => f64::from(u8::from(a[i][j])),
        'T' => f64::from(u8::from(a[j][i])),
        other => panic!("unknown symbol {other}"),
    };
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for c in word.chars() {
        m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| m[i][k] * entry(c, k, j)).sum())
                    .collect()
            })
            .collect();
    }
    let cols = x.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..cols)
                .map(|j| (0..n).map(|k| m[i][k] * x[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Central difference `(f(x + h e_k) − f(x − h e_k)) / 2h`.
pub fn central_difference(
    f: &mut impl FnMut(&[f64]) -> f64,
    x: &[f64],
    k: usize,
    step: f64,
) -> f64 {
    let mut probe = x.to_vec();
    probe[k] = x[k] + step;
    let up = f(&probe);
    probe[k] = x[k] - step;
    let down = f(&probe);
    (up - down) / (2.0 * step)
}

/// Outcome of comparing an analytic gradient with central differences.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradientCheck {
    /// Largest relative error among components large enough to judge
    /// relatively.
    pub worst_relative: f64,
    /// Components too small to judge relatively that still differ by more
    /// than the round-off level: `(index, analytic, numeric)`.
    pub noise_failures: Vec<(usize, f64, f64)>,
}

impl GradientCheck {
    pub fn passes(&self, max_relative: f64) -> bool {
        self.worst_relative < max_relative && self.noise_failures.is_empty()
    }
}

/// Checks `grad` against central differences of `f` at `x` on `coords`.
///
/// A central difference carries round-off of about `ε·|f| / step`.
/// Components for which that noise would exceed `max_relative` of their
/// magnitude are compared in absolute terms against the noise instead.
pub fn check_gradient(
    f: &mut impl FnMut(&[f64]) -> f64,
    x: &[f64],
    grad: &[f64],
    coords: &[usize],
    step: f64,
    max_relative: f64,
) -> GradientCheck {
    let noise = 10.0 * f64::EPSILON * f(x).abs().max(1.0) / step;
    let mut out = GradientCheck::default();
    for &k in coords {
        let numeric = central_difference(f, x, k, step);
        let scale = grad[k].abs().max(numeric.abs());
        if scale * max_relative > noise {
            out.worst_relative = out.worst_relative.max((grad[k] - numeric).abs() / scale);
        } else if (grad[k] - numeric).abs() >= noise {
            out.noise_failures.push((k, grad[k], numeric));
        }
    }
    out
}
