use crate::graph::DirectedGraph;

const MAX_ITERATIONS: usize = 100_000;

/// PageRank by power iteration. Mass of dangling nodes is spread uniformly.
/// Iterates until the L1 change between sweeps drops below `tol`.
pub fn pagerank(g: &DirectedGraph, damping: f64, tol: f64) -> Vec<f64> {
    let n = g.n_nodes();
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        let dangling: f64 = (0..n)
            .filter(|&u| g.out_degree(u) == 0)
            .map(|u| rank[u])
            .sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for v in 0..n {
            let inflow: f64 = g
                .in_neighbors(v)
                .iter()
                .map(|&u| rank[u] / g.out_degree(u) as f64)
                .sum();
            next[v] = base + damping * inflow;
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < tol {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_is_uniform() {
        let g = DirectedGraph::from_edge_list(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        for r in pagerank(&g, 0.85, 1e-12) {
            assert!((r - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn two_node_closed_form() {
        // a→b, b dangling:  a = (1-d)/2 + d·b/2  and  a + b = 1
        // so a·(1 + d/2) = 1/2
        let d: f64 = 0.85;
        let a = 0.5 / (1.0 + d / 2.0);
        let g = DirectedGraph::from_edge_list(2, &[(0, 1)]);
        let pr = pagerank(&g, d, 1e-14);
        assert!((pr[0] - a).abs() < 1e-12);
        assert!((pr[1] - (1.0 - a)).abs() < 1e-12);
        assert!(pr[1] > pr[0]);
    }
}
