use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;

/// Which edges are counted when pairing node classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeView {
    /// Each connected pair once per endpoint, regardless of direction.
    #[default]
    Undirected,
    /// Class of the source against class of the target.
    Outgoing,
    /// Class of the target against class of the source.
    Incoming,
}

/// Row `j`, column `i`: fraction of the neighbors of class-`j` nodes that
/// have class `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCorrelation {
    pub matrix: Vec<Vec<f64>>,
    /// Raw neighbor-pair counts behind `matrix`.
    pub counts: Vec<Vec<u64>>,
    /// Mean of the diagonal of `matrix`.
    pub diagonal_mass: f64,
    /// `Σ p(c)²`: the diagonal mass expected if neighbors had random classes
    /// drawn from the class frequencies.
    pub frequency_baseline: f64,
    /// `1 / C`.
    pub uniform_baseline: f64,
}

pub fn class_correlation(ds: &LabeledDataset, view: EdgeView) -> ClassCorrelation {
    let c = ds.n_classes;
    let mut counts = vec![vec![0u64; c]; c];
    let g = &ds.graph;
    match view {
        EdgeView::Undirected => {
            for (u, nb) in g.undirected_adjacency().iter().enumerate() {
                for &v in nb {
                    counts[ds.labels[u]][ds.labels[v]] += 1;
                }
            }
        }
        EdgeView::Outgoing | EdgeView::Incoming => {
            for (u, v) in g.edges() {
                let (from, to) = if view == EdgeView::Outgoing {
                    (u, v)
                } else {
                    (v, u)
                };
                counts[ds.labels[from]][ds.labels[to]] += 1;
            }
        }
    }
    let matrix: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| {
            let s: u64 = row.iter().sum();
            row.iter()
                .map(|&x| if s > 0 { x as f64 / s as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let diagonal_mass = if c == 0 {
        0.0
    } else {
        (0..c).map(|j| matrix[j][j]).sum::<f64>() / c as f64
    };
    let n = ds.n_nodes().max(1) as f64;
    let frequency_baseline = ds
        .class_counts()
        .iter()
        .map(|&k| (k as f64 / n).powi(2))
        .sum();
    ClassCorrelation {
        matrix,
        counts,
        diagonal_mass,
        frequency_baseline,
        uniform_baseline: if c == 0 { 0.0 } else { 1.0 / c as f64 },
    }
}
