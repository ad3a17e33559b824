use crate::graph::DirectedGraph;

/// Core number of every node, using total degree (in + out), so a reciprocal
/// pair contributes 2 to each endpoint.
///
/// Bucket-based peeling: nodes are removed in order of current degree and each
/// removal lowers the degree of its remaining neighbors.
pub fn k_core(g: &DirectedGraph) -> Vec<f64> {
    let n = g.n_nodes();
    let mut degree: Vec<usize> = (0..n).map(|u| g.in_degree(u) + g.out_degree(u)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);

    // nodes sorted by degree, with bucket starts and each node's position
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut order = vec![0usize; n];
    for u in 0..n {
        pos[u] = bin[degree[u]];
        order[pos[u]] = u;
        bin[degree[u]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..n {
        let v = order[i];
        for &u in g.out_neighbors(v).iter().chain(g.in_neighbors(v)) {
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree.into_iter().map(|d| d as f64).collect()
}
