//! Immutable directed graph in compressed adjacency form.
//!
//! Both the successor and predecessor indexes are stored so that forward and
//! reverse traversals are equally cheap. Neighbor lists are sorted and free of
//! duplicates and self-loops.

use serde::{Deserialize, Serialize};

/// Counts of input edges that were discarded while building a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
}

fn compress(n: usize, pairs: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; n + 1];
    for &(u, _) in pairs {
        offsets[u + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0usize; pairs.len()];
    for &(u, v) in pairs {
        targets[cursor[u]] = v;
        cursor[u] += 1;
    }
    for u in 0..n {
        targets[offsets[u]..offsets[u + 1]].sort_unstable();
    }
    (offsets, targets)
}

impl DirectedGraph {
    /// Builds a graph on `n` nodes, dropping self-loops and repeated edges.
    ///
    /// Panics if an endpoint is `>= n`.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> (Self, EdgeReport) {
        let mut report = EdgeReport::default();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            if u == v {
                report.self_loops += 1;
            } else {
                pairs.push((u, v));
            }
        }
        let before = pairs.len();
        pairs.sort_unstable();
        pairs.dedup();
        report.duplicates = before - pairs.len();

        let (out_offsets, out_targets) = compress(n, &pairs);
        let reversed: Vec<(usize, usize)> = pairs.iter().map(|&(u, v)| (v, u)).collect();
        let (in_offsets, in_sources) = compress(n, &reversed);
        (
            DirectedGraph {
                out_offsets,
                out_targets,
                in_offsets,
                in_sources,
            },
            report,
        )
    }

    /// Convenience constructor for tests and small fixtures.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Self {
        Self::from_edges(n, edges.iter().copied()).0
    }

    pub fn n_nodes(&self) -> usize {
        self.out_offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.out_targets.len()
    }

    #[inline]
    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, u: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[u]..self.in_offsets[u + 1]]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.in_offsets[u + 1] - self.in_offsets[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// All edges in (source, target) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes()).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Distinct neighbors of `u` ignoring direction, sorted.
    pub fn undirected_neighbors(&self, u: usize) -> Vec<usize> {
        let (a, b) = (self.out_neighbors(u), self.in_neighbors(u));
        let mut merged = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            merged.push(next);
        }
        merged
    }

    /// Undirected simple adjacency lists for every node.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n_nodes())
            .map(|u| self.undirected_neighbors(u))
            .collect()
    }

    /// The graph with every edge reversed.
    pub fn transpose(&self) -> DirectedGraph {
        DirectedGraph {
            out_offsets: self.in_offsets.clone(),
            out_targets: self.in_sources.clone(),
            in_offsets: self.out_offsets.clone(),
            in_sources: self.out_targets.clone(),
        }
    }

    /// Component index per node for weakly connected components. Components
    /// are numbered in order of their smallest node.
    pub fn weak_components(&self) -> Vec<usize> {
        let n = self.n_nodes();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in self.out_neighbors(u).iter().chain(self.in_neighbors(u)) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Node set of the largest weakly connected component, sorted. Ties go to
    /// the component containing the smallest node index.
    pub fn largest_weak_component(&self) -> Vec<usize> {
        let comp = self.weak_components();
        let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; n_comp];
        for &c in &comp {
            sizes[c] += 1;
        }
        let Some(best) = (0..n_comp).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))) else {
            return Vec::new();
        };
        (0..self.n_nodes()).filter(|&u| comp[u] == best).collect()
    }

    /// Subgraph induced by `nodes` (must be sorted and distinct). Node `nodes[i]`
    /// becomes node `i`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> DirectedGraph {
        let mut index = vec![usize::MAX; self.n_nodes()];
        for (i, &u) in nodes.iter().enumerate() {
            index[u] = i;
        }
        let edges = nodes.iter().enumerate().flat_map(|(i, &u)| {
            let index = &index;
            self.out_neighbors(u)
                .iter()
                .filter(move |&&v| index[v] != usize::MAX)
                .map(move |&v| (i, index[v]))
        });
        DirectedGraph::from_edges(nodes.len(), edges).0
    }

    /// Relabels nodes so that old node `u` becomes `perm[u]`.
    pub fn permute(&self, perm: &[usize]) -> DirectedGraph {
        assert_eq!(perm.len(), self.n_nodes());
        DirectedGraph::from_edges(
            self.n_nodes(),
            self.edges().map(|(u, v)| (perm[u], perm[v])),
        )
        .0
    }

    /// Graph containing both orientations of every edge.
    pub fn symmetrized(&self) -> DirectedGraph {
        DirectedGraph::from_edges(
            self.n_nodes(),
            self.edges().flat_map(|(u, v)| [(u, v), (v, u)]),
        )
        .0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drops_loops_and_duplicates() {
        let (g, report) = DirectedGraph::from_edges(3, [(0, 1), (0, 1), (1, 1), (2, 0)]);
        assert_eq!(g.n_edges(), 2);
        assert_eq!(
            report,
            EdgeReport {
                self_loops: 1,
                duplicates: 1
            }
        );
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.in_neighbors(0), &[2]);
    }

    #[test]
    fn undirected_neighbors_merge_reciprocal_edges() {
        let g = DirectedGraph::from_edge_list(4, &[(0, 1), (1, 0), (0, 3), (2, 0)]);
        assert_eq!(g.undirected_neighbors(0), vec![1, 2, 3]);
    }

    #[test]
    fn largest_component_picks_biggest() {
        let g = DirectedGraph::from_edge_list(6, &[(0, 1), (3, 2), (4, 3), (5, 5)]);
        assert_eq!(g.largest_weak_component(), vec![2, 3, 4]);
        let sub = g.induced_subgraph(&[2, 3, 4]);
        assert_eq!(sub.n_edges(), 2);
        assert!(sub.has_edge(1, 0) && sub.has_edge(2, 1));
    }

    fn arb_graph() -> impl Strategy<Value = DirectedGraph> {
        (1usize..25).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..80)
                .prop_map(move |edges| DirectedGraph::from_edge_list(n, &edges))
        })
    }

    proptest! {
        #[test]
        fn in_index_is_transpose_of_out_index(g in arb_graph()) {
            let n = g.n_nodes();
            let mut rebuilt = vec![Vec::new(); n];
            for (u, v) in g.edges() {
                rebuilt[v].push(u);
            }
            let in_total: usize = (0..n).map(|u| g.in_degree(u)).sum();
            prop_assert_eq!(in_total, g.n_edges());
            for v in 0..n {
                prop_assert_eq!(&rebuilt[v][..], g.in_neighbors(v));
            }
            for (u, v) in g.edges() {
                prop_assert!(u != v);
            }
        }
    }
}
