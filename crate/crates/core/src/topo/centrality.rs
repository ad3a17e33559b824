//! Degree and shortest-path centralities. All distances are hop counts along
//! edge direction; unreachable pairs are ignored rather than treated as
//! infinite.

use super::bfs::{bfs, per_node, sum_over_sources, Walk, UNREACHABLE};
use crate::graph::DirectedGraph;

/// `(in_degree, out_degree)` per node.
pub fn degree_features(g: &DirectedGraph) -> (Vec<f64>, Vec<f64>) {
    let n = g.n_nodes();
    (
        (0..n).map(|u| g.in_degree(u) as f64).collect(),
        (0..n).map(|u| g.out_degree(u) as f64).collect(),
    )
}

/// Mean total degree of each node's neighbors, direction ignored. Isolated
/// nodes get 0.
pub fn average_neighbor_degree(g: &DirectedGraph) -> Vec<f64> {
    let total = |u: usize| (g.in_degree(u) + g.out_degree(u)) as f64;
    (0..g.n_nodes())
        .map(|u| {
            let nb = g.undirected_neighbors(u);
            if nb.is_empty() {
                0.0
            } else {
                nb.iter().map(|&v| total(v)).sum::<f64>() / nb.len() as f64
            }
        })
        .collect()
}

/// Unnormalized directed betweenness (Brandes accumulation).
pub fn betweenness_centrality(g: &DirectedGraph) -> Vec<f64> {
    let n = g.n_nodes();
    sum_over_sources(n, |s| {
        let (dist, order) = bfs(g, s, Walk::Out);
        let mut sigma = vec![0.0f64; n];
        sigma[s] = 1.0;
        for &u in &order {
            for &v in g.out_neighbors(u) {
                if dist[v] == dist[u] + 1 {
                    sigma[v] += sigma[u];
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            if w == s {
                continue;
            }
            let coeff = (1.0 + delta[w]) / sigma[w];
            for &v in g.in_neighbors(w) {
                if dist[v] != UNREACHABLE && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] * coeff;
                }
            }
        }
        delta[s] = 0.0;
        delta
    })
}

/// Load centrality: a unit of flow is sent from every node to every other
/// reachable node, splitting equally among the successors that lie on a
/// shortest path to the target. A node's load is the flow passing through it
/// as an intermediate.
///
/// For a fixed target the split rule depends only on distances to the target,
/// so all sources are pushed at once by sweeping nodes in decreasing distance.
pub fn load_centrality(g: &DirectedGraph) -> Vec<f64> {
    let n = g.n_nodes();
    sum_over_sources(n, |t| {
        let (to_t, order) = bfs(g, t, Walk::In);
        let mut flow = vec![0.0f64; n];
        for &u in &order[1..] {
            flow[u] = 1.0;
        }
        for &u in order.iter().rev() {
            if u == t {
                continue;
            }
            let next: Vec<usize> = g
                .out_neighbors(u)
                .iter()
                .copied()
                .filter(|&w| to_t[w] != UNREACHABLE && to_t[w] + 1 == to_t[u])
                .collect();
            let share = flow[u] / next.len() as f64;
            for w in next {
                flow[w] += share;
            }
        }
        let mut load = vec![0.0; n];
        for &u in &order[1..] {
            load[u] = flow[u] - 1.0;
        }
        load
    })
}

struct Reach {
    count: usize,
    sum: f64,
    sum_sq: f64,
    max: u32,
}

fn reach(g: &DirectedGraph, s: usize) -> Reach {
    let (dist, order) = bfs(g, s, Walk::Out);
    let mut r = Reach {
        count: order.len() - 1,
        sum: 0.0,
        sum_sq: 0.0,
        max: 0,
    };
    for &v in &order[1..] {
        let d = dist[v] as f64;
        r.sum += d;
        r.sum_sq += d * d;
        r.max = r.max.max(dist[v]);
    }
    r
}

/// Reachable count divided by the total distance to reachable nodes; 0 for
/// nodes that reach nothing.
pub fn closeness_centrality(g: &DirectedGraph) -> Vec<f64> {
    per_node(g.n_nodes(), |s| {
        let r = reach(g, s);
        if r.sum > 0.0 {
            r.count as f64 / r.sum
        } else {
            0.0
        }
    })
}

/// Largest finite distance from each node; 0 if it reaches nothing.
pub fn eccentricity(g: &DirectedGraph) -> Vec<f64> {
    per_node(g.n_nodes(), |s| reach(g, s).max as f64)
}

/// Mean and second raw moment of the distances from each node to the nodes it
/// reaches.
pub fn bfs_moments(g: &DirectedGraph) -> (Vec<f64>, Vec<f64>) {
    per_node(g.n_nodes(), |s| {
        let r = reach(g, s);
        if r.count == 0 {
            (0.0, 0.0)
        } else {
            let c = r.count as f64;
            (r.sum / c, r.sum_sq / c)
        }
    })
    .into_iter()
    .unzip()
}
