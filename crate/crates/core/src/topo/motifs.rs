//! Per-node participation counts in connected induced subgraphs of 3 or 4
//! nodes, bucketed by isomorphism class.
//!
//! # Class numbering
//!
//! A `k`-node subgraph with ordered nodes `0..k` is encoded as a bitmask over
//! the ordered pairs `(i, j)`, `i != j`, with bit `i·(k−1) + (j if j < i else
//! j−1)` set when the edge `i→j` is present. The canonical form of a subgraph
//! is the smallest mask over all `k!` node orderings. Class `c` of a catalog is
//! the `c`-th smallest canonical mask among weakly connected graphs. This gives
//! 13 directed classes for `k = 3`, 199 for `k = 4`, and 2 and 6 classes in
//! undirected mode, where every edge is treated as reciprocal.
//!
//! Subgraphs are enumerated with the ESU scheme: each connected node set is
//! produced exactly once, rooted at its smallest node.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifMode {
    #[default]
    Directed,
    Undirected,
}

/// Lookup table from subgraph bitmask to class id.
pub struct MotifCatalog {
    size: usize,
    mode: MotifMode,
    class_of: Vec<u16>,
    canonical: Vec<u16>,
}

const NO_CLASS: u16 = u16::MAX;

#[inline]
fn bit(k: usize, i: usize, j: usize) -> usize {
    i * (k - 1) + if j < i { j } else { j - 1 }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for x in 0..k {
            if !prefix.contains(&x) {
                prefix.push(x);
                rec(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), k, &mut out);
    out
}

fn permute_mask(mask: u16, k: usize, perm: &[usize]) -> u16 {
    let mut out = 0u16;
    for i in 0..k {
        for j in 0..k {
            if i != j && mask & (1 << bit(k, i, j)) != 0 {
                out |= 1 << bit(k, perm[i], perm[j]);
            }
        }
    }
    out
}

fn weakly_connected(mask: u16, k: usize) -> bool {
    let mut seen = 1u32;
    let mut frontier = vec![0usize];
    while let Some(u) = frontier.pop() {
        for v in 0..k {
            if u != v
                && seen & (1 << v) == 0
                && (mask & (1 << bit(k, u, v)) != 0 || mask & (1 << bit(k, v, u)) != 0)
            {
                seen |= 1 << v;
                frontier.push(v);
            }
        }
    }
    seen.count_ones() as usize == k
}

fn symmetrize(mask: u16, k: usize) -> u16 {
    let mut out = mask;
    for i in 0..k {
        for j in 0..k {
            if i != j && mask & (1 << bit(k, i, j)) != 0 {
                out |= 1 << bit(k, j, i);
            }
        }
    }
    out
}

impl MotifCatalog {
    fn build(size: usize, mode: MotifMode) -> Self {
        let bits = size * (size - 1);
        let perms = permutations(size);
        let mut canon_of = vec![0u16; 1 << bits];
        let mut canonical: Vec<u16> = Vec::new();
        for mask in 0..(1u32 << bits) {
            let mask = mask as u16;
            let c = perms
                .iter()
                .map(|p| permute_mask(mask, size, p))
                .min()
                .unwrap();
            canon_of[mask as usize] = c;
            let admissible = mode == MotifMode::Directed || symmetrize(mask, size) == mask;
            if c == mask && admissible && weakly_connected(mask, size) {
                canonical.push(mask);
            }
        }
        canonical.sort_unstable();
        let mut class_of = vec![NO_CLASS; 1 << bits];
        for mask in 0..(1usize << bits) {
            let m = match mode {
                MotifMode::Directed => mask as u16,
                MotifMode::Undirected => symmetrize(mask as u16, size),
            };
            if let Ok(c) = canonical.binary_search(&canon_of[m as usize]) {
                class_of[mask] = c as u16;
            }
        }
        MotifCatalog {
            size,
            mode,
            class_of,
            canonical,
        }
    }

    /// Shared catalog for `size ∈ {3, 4}`.
    pub fn get(size: usize, mode: MotifMode) -> Result<&'static MotifCatalog> {
        static CATALOGS: [OnceLock<MotifCatalog>; 4] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        let slot = match (size, mode) {
            (3, MotifMode::Directed) => 0,
            (4, MotifMode::Directed) => 1,
            (3, MotifMode::Undirected) => 2,
            (4, MotifMode::Undirected) => 3,
            _ => return Err(Error::invalid(format!("motif size {size} not in {{3, 4}}"))),
        };
        Ok(CATALOGS[slot].get_or_init(|| MotifCatalog::build(size, mode)))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mode(&self) -> MotifMode {
        self.mode
    }

    pub fn n_classes(&self) -> usize {
        self.canonical.len()
    }

    /// Canonical mask of each class, in class order.
    pub fn canonical_masks(&self) -> &[u16] {
        &self.canonical
    }

    /// Edges `(i, j)` of the canonical representative of `class`.
    pub fn representative_edges(&self, class: usize) -> Vec<(usize, usize)> {
        let k = self.size;
        let mask = self.canonical[class];
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && mask & (1 << bit(k, i, j)) != 0)
            .collect()
    }

    /// Class of the subgraph induced by `nodes`, or `None` if it is not
    /// connected.
    pub fn classify(&self, g: &DirectedGraph, nodes: &[usize]) -> Option<usize> {
        let k = self.size;
        debug_assert_eq!(nodes.len(), k);
        let mut mask = 0u16;
        for i in 0..k {
            let out = g.out_neighbors(nodes[i]);
            for j in 0..k {
                if i != j && out.binary_search(&nodes[j]).is_ok() {
                    mask |= 1 << bit(k, i, j);
                }
            }
        }
        match self.class_of[mask as usize] {
            NO_CLASS => None,
            c => Some(c as usize),
        }
    }
}

/// Calls `visit` once for every weakly connected node set of size `k`.
fn for_each_connected_set(
    adj: &[Vec<usize>],
    root: usize,
    k: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    fn extend(
        adj: &[Vec<usize>],
        root: usize,
        k: usize,
        sub: &mut Vec<usize>,
        ext: Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if sub.len() == k {
            visit(sub);
            return;
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &adj[w] {
                if u > root
                    && !sub.contains(&u)
                    && !next.contains(&u)
                    && !sub.iter().any(|&s| adj[s].binary_search(&u).is_ok())
                {
                    next.push(u);
                }
            }
            sub.push(w);
            extend(adj, root, k, sub, next, visit);
            sub.pop();
        }
    }
    let ext: Vec<usize> = adj[root].iter().copied().filter(|&u| u > root).collect();
    extend(adj, root, k, &mut vec![root], ext, visit);
}

/// Per-node counts, one column per class of the catalog.
pub fn motif_counts(g: &DirectedGraph, size: usize, mode: MotifMode) -> Result<Vec<Vec<f64>>> {
    let catalog = MotifCatalog::get(size, mode)?;
    let n = g.n_nodes();
    let n_classes = catalog.n_classes();
    let adj = g.undirected_adjacency();
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; n * n_classes],
            |mut acc, root| {
                for_each_connected_set(&adj, root, size, &mut |nodes| {
                    let c = catalog
                        .classify(g, nodes)
                        .expect("ESU yields connected sets");
                    for &u in nodes {
                        acc[u * n_classes + c] += 1;
                    }
                });
                acc
            },
        )
        .reduce(
            || vec![0u64; n * n_classes],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok((0..n_classes)
        .map(|c| (0..n).map(|u| counts[u * n_classes + c] as f64).collect())
        .collect())
}
