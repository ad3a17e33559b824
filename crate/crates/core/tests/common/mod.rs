#![allow(dead_code, unused_imports)]

use nodeclass::DirectedGraph;
use nodeclass_oracles::Adjacency;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use nodeclass_oracles::symmetrize;

/// Random digraph with `lo..=hi` nodes and a per-graph edge density.
pub fn random_digraph(seed: u64, lo: usize, hi: usize) -> DirectedGraph {
    let (n, edges) = nodeclass_oracles::random_edges(seed, lo, hi);
    DirectedGraph::from_edge_list(n, &edges)
}

/// The 100 graphs every oracle is checked on.
pub fn corpus() -> impl Iterator<Item = DirectedGraph> {
    nodeclass_oracles::corpus().map(|(n, edges)| DirectedGraph::from_edge_list(n, &edges))
}

pub fn dense_adjacency(g: &DirectedGraph) -> Adjacency {
    nodeclass_oracles::dense(g.n_nodes(), &g.edges().collect::<Vec<_>>())
}

pub fn assert_close(actual: &[f64], expected: &[f64], tol: f64, what: &str) {
    assert_eq!(actual.len(), expected.len(), "{what}: length");
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        assert!(
            (a - e).abs() <= tol * e.abs().max(1.0),
            "{what}: node {i}: got {a}, expected {e}"
        );
    }
}

/// Random permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}
