//! Measures contrasting forward and backward reachability: flow and
//! attraction basin.

use super::bfs::{bfs, per_node, Walk, UNREACHABLE};
use crate::graph::DirectedGraph;

/// Flow `F(u)`: mean over the nodes `v` reachable from `u` of
/// `d_undirected(u, v) / d_directed(u, v)`.
///
/// Nodes whose reachable set is not larger than `threshold` times the largest
/// reachable set in the graph get 0.
pub fn flow(g: &DirectedGraph, threshold: f64) -> Vec<f64> {
    let n = g.n_nodes();
    let raw: Vec<(usize, f64)> = per_node(n, |u| {
        let (directed, order) = bfs(g, u, Walk::Out);
        if order.len() == 1 {
            return (0, 0.0);
        }
        let (undirected, _) = bfs(g, u, Walk::Any);
        let ratio_sum: f64 = order[1..]
            .iter()
            .map(|&v| undirected[v] as f64 / directed[v] as f64)
            .sum();
        let reach = order.len() - 1;
        (reach, ratio_sum / reach as f64)
    });
    let max_reach = raw.iter().map(|&(r, _)| r).max().unwrap_or(0);
    raw.into_iter()
        .map(|(reach, f)| {
            if max_reach > 0 && reach as f64 / max_reach as f64 > threshold {
                f
            } else {
                0.0
            }
        })
        .collect()
}

fn shell_counts(dist: &[u32]) -> Vec<usize> {
    let mut counts = Vec::new();
    for &d in dist {
        if d != UNREACHABLE && d > 0 {
            let d = d as usize;
            if counts.len() < d {
                counts.resize(d, 0);
            }
            counts[d - 1] += 1;
        }
    }
    counts
}

/// Attraction basin `A(i)`: discounted, mean-normalized sizes of the shells of
/// nodes reaching `i` divided by the same quantity for the shells `i` reaches.
///
/// Shells run over distances `1..=D` with `D` the directed diameter. A node
/// whose outgoing sum is zero gets 0.
pub fn attraction_basin(g: &DirectedGraph, alpha: f64) -> Vec<f64> {
    let n = g.n_nodes();
    let shells: Vec<(Vec<usize>, Vec<usize>)> = per_node(n, |i| {
        (
            shell_counts(&bfs(g, i, Walk::Out).0),
            shell_counts(&bfs(g, i, Walk::In).0),
        )
    });
    let diameter = shells.iter().map(|(o, _)| o.len()).max().unwrap_or(0);
    let mut mean_out = vec![0.0; diameter];
    let mut mean_in = vec![0.0; diameter];
    for (out, inc) in &shells {
        for (m, &c) in out.iter().enumerate() {
            mean_out[m] += c as f64;
        }
        for (m, &c) in inc.iter().enumerate() {
            mean_in[m] += c as f64;
        }
    }
    for m in 0..diameter {
        mean_out[m] /= n as f64;
        mean_in[m] /= n as f64;
    }
    let weights: Vec<f64> = (1..=diameter).map(|m| alpha.powi(-(m as i32))).collect();
    let weighted = |counts: &[usize], means: &[f64]| -> f64 {
        counts
            .iter()
            .enumerate()
            .filter(|&(m, _)| means[m] > 0.0)
            .map(|(m, &c)| c as f64 / means[m] * weights[m])
            .sum()
    };
    shells
        .iter()
        .map(|(out, inc)| {
            let den = weighted(out, &mean_out);
            if den == 0.0 {
                0.0
            } else {
                weighted(inc, &mean_in) / den
            }
        })
        .collect()
}
