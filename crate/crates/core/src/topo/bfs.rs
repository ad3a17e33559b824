//! Breadth-first search primitives shared by the distance-based measures.

use rayon::prelude::*;

use crate::graph::DirectedGraph;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Walk {
    /// Follow edges forward.
    Out,
    /// Follow edges backward.
    In,
    /// Ignore direction.
    Any,
}

/// Hop distances from `source` plus the visit order.
pub fn bfs(g: &DirectedGraph, source: usize, walk: Walk) -> (Vec<u32>, Vec<usize>) {
    let n = g.n_nodes();
    let mut dist = vec![UNREACHABLE; n];
    let mut order = Vec::with_capacity(n);
    dist[source] = 0;
    order.push(source);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        let du = dist[u] + 1;
        let mut visit = |v: usize| {
            if dist[v] == UNREACHABLE {
                dist[v] = du;
                order.push(v);
            }
        };
        match walk {
            Walk::Out => g.out_neighbors(u).iter().for_each(|&v| visit(v)),
            Walk::In => g.in_neighbors(u).iter().for_each(|&v| visit(v)),
            Walk::Any => g
                .out_neighbors(u)
                .iter()
                .chain(g.in_neighbors(u))
                .for_each(|&v| visit(v)),
        }
    }
    (dist, order)
}

const CHUNK: usize = 128;

/// Sums `per_source(s)` over all sources. Sources are evaluated in parallel
/// but added in index order, so the result does not depend on thread count.
pub fn sum_over_sources<F>(n: usize, per_source: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    let mut total = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let parts: Vec<Vec<f64>> = (start..end).into_par_iter().map(&per_source).collect();
        for part in parts {
            for (t, x) in total.iter_mut().zip(part) {
                *t += x;
            }
        }
        start = end;
    }
    total
}

/// Evaluates `f` for every node in parallel, returning results in node order.
pub fn per_node<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).into_par_iter().map(&f).collect()
}
