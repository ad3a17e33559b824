//! Louvain modularity optimization on the undirected, unit-weight view of a
//! directed graph.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::DirectedGraph;

/// Result of a Louvain run.
#[derive(Clone, Debug, PartialEq)]
pub struct Communities {
    /// Community id per node; ids are numbered by first appearance in node
    /// order.
    pub membership: Vec<usize>,
    pub sizes: Vec<usize>,
    pub modularity: f64,
}

/// Modularity `Q` of `membership` on the undirected simple graph underlying
/// `g`. Returns 0 for graphs without edges.
pub fn modularity(g: &DirectedGraph, membership: &[usize]) -> f64 {
    let adj = g.undirected_adjacency();
    let two_m: f64 = adj.iter().map(|a| a.len() as f64).sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let n_comm = membership.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; n_comm];
    let mut degree = vec![0.0; n_comm];
    for (u, nb) in adj.iter().enumerate() {
        degree[membership[u]] += nb.len() as f64;
        for &v in nb {
            if membership[v] == membership[u] {
                internal[membership[u]] += 1.0;
            }
        }
    }
    (0..n_comm)
        .map(|c| internal[c] / two_m - (degree[c] / two_m).powi(2))
        .sum()
}

/// Weighted undirected graph with self-loops, stored as adjacency lists in
/// which a self-loop of weight `w` contributes `w` to the node's strength.
struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    fn strength(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum()
    }
}

const MAX_PASSES: usize = 1000;

/// One round of local moves. Returns the community of each node and whether
/// any node moved.
fn local_moves(wg: &WeightedGraph, two_m: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = wg.adj.len();
    let strength: Vec<f64> = (0..n).map(|u| wg.strength(u)).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = strength.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0f64; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    for _pass in 0..MAX_PASSES {
        let mut moved = false;
        for &u in &order {
            let home = comm[u];
            for &(v, w) in &wg.adj[u] {
                if v == u {
                    continue;
                }
                let c = comm[v];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                link[c] += w;
            }
            total[home] -= strength[u];
            let gain = |c: usize, link_c: f64| link_c - total[c] * strength[u] / two_m;
            let mut best = home;
            let mut best_gain = gain(home, link[home]);
            for &c in &touched {
                let g = gain(c, link[c]);
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += strength[u];
            if best != home {
                comm[u] = best;
                moved = true;
                any_move = true;
            }
            for &c in &touched {
                link[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    (comm, any_move)
}

fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.len()];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

fn aggregate(wg: &WeightedGraph, comm: &[usize], n_comm: usize) -> WeightedGraph {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_comm];
    for (u, nb) in wg.adj.iter().enumerate() {
        for &(v, w) in nb {
            adj[comm[u]].push((comm[v], w));
        }
    }
    for list in &mut adj {
        list.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(list.len());
        for &(v, w) in list.iter() {
            match merged.last_mut() {
                Some((lv, lw)) if *lv == v => *lw += w,
                _ => merged.push((v, w)),
            }
        }
        *list = merged;
    }
    WeightedGraph { adj }
}

/// Runs Louvain until a full level produces no move. The node visiting order
/// of every level is shuffled from `seed`.
pub fn louvain(g: &DirectedGraph, seed: u64) -> Communities {
    let n = g.n_nodes();
    let simple = g.undirected_adjacency();
    let two_m: f64 = simple.iter().map(|a| a.len() as f64).sum();
    let mut membership: Vec<usize> = (0..n).collect();
    if two_m > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wg = WeightedGraph {
            adj: simple
                .iter()
                .map(|nb| nb.iter().map(|&v| (v, 1.0)).collect())
                .collect(),
        };
        loop {
            let (comm, moved) = local_moves(&wg, two_m, &mut rng);
            if !moved {
                break;
            }
            let (comm, n_comm) = renumber(&comm);
            for m in membership.iter_mut() {
                *m = comm[*m];
            }
            wg = aggregate(&wg, &comm, n_comm);
        }
    }
    let (membership, n_comm) = renumber(&membership);
    let mut sizes = vec![0; n_comm];
    for &c in &membership {
        sizes[c] += 1;
    }
    let modularity = modularity(g, &membership);
    Communities {
        membership,
        sizes,
        modularity,
    }
}

/// `(community_size, community_id)` per node.
pub fn louvain_features(g: &DirectedGraph, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let c = louvain(g, seed);
    c.membership
        .iter()
        .map(|&m| (c.sizes[m] as f64, m as f64))
        .unzip()
}
