//! Seeded generator of small citation-like datasets for tests and demos.
//!
//! Nodes are "papers" arriving in order; each cites earlier papers, preferring
//! its own class with probability `homophily`. Every paper carries a binary
//! bag-of-words drawn partly from a class-specific vocabulary.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug)]
pub struct CitationParams {
    pub n_nodes: usize,
    pub n_classes: usize,
    pub mean_out_degree: f64,
    pub homophily: f64,
    pub n_words: usize,
    pub words_per_doc: usize,
    /// Probability that a drawn word comes from the paper's class vocabulary.
    pub topic_strength: f64,
}

impl Default for CitationParams {
    fn default() -> Self {
        CitationParams {
            n_nodes: 200,
            n_classes: 4,
            mean_out_degree: 2.0,
            homophily: 0.8,
            n_words: 60,
            words_per_doc: 8,
            topic_strength: 0.6,
        }
    }
}

pub fn citation_dataset(params: &CitationParams, seed: u64) -> LabeledDataset {
    let CitationParams {
        n_nodes: n,
        n_classes: c,
        ..
    } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut edges = Vec::new();
    for u in 0..n {
        if u > 0 {
            let k = rng.random_range(0..=(2.0 * params.mean_out_degree).round() as usize);
            for _ in 0..k {
                let same = &by_class[labels[u]];
                let v = if !same.is_empty() && rng.random::<f64>() < params.homophily {
                    same[rng.random_range(0..same.len())]
                } else {
                    rng.random_range(0..u)
                };
                edges.push((u, v));
            }
        }
        by_class[labels[u]].push(u);
    }
    let (graph, _) = DirectedGraph::from_edges(n, edges);

    let words_per_class = (params.n_words / c).max(1);
    let mut bow = DenseMatrix::zeros(n, params.n_words);
    for u in 0..n {
        for _ in 0..params.words_per_doc {
            let w = if rng.random::<f64>() < params.topic_strength {
                (labels[u] * words_per_class + rng.random_range(0..words_per_class))
                    % params.n_words
            } else {
                rng.random_range(0..params.n_words)
            };
            bow[(u, w)] = 1.0;
        }
    }
    let ids = (0..n).map(|u| format!("p{u}")).collect();
    let mut ds = LabeledDataset::new(graph, labels, c, ids)
        .and_then(|d| d.with_features(bow))
        .expect("generator produces consistent shapes");
    ds.class_names = (0..c).map(|k| format!("topic_{k}")).collect();
    ds
}

/// Writes a dataset in the `<prefix>.content` / `<prefix>.cites` format, with
/// cites lines as `cited citing`.
pub fn write_citation_files(ds: &LabeledDataset, prefix: impl AsRef<Path>) -> Result<()> {
    let (content_path, cites_path) = crate::dataset::dataset_paths(prefix);
    let mut out = Vec::new();
    for u in 0..ds.n_nodes() {
        write!(out, "{}", ds.node_ids[u]).expect("write to Vec");
        if let Some(f) = &ds.external_features {
            for &x in f.row(u) {
                write!(out, "\t{x}").expect("write to Vec");
            }
        }
        writeln!(out, "\t{}", ds.class_names[ds.labels[u]]).expect("write to Vec");
    }
    fs::write(&content_path, out).map_err(|e| Error::io(&content_path, e))?;
    let mut out = Vec::new();
    for (citing, cited) in ds.graph.edges() {
        writeln!(out, "{}\t{}", ds.node_ids[cited], ds.node_ids[citing]).expect("write to Vec");
    }
    fs::write(&cites_path, out).map_err(|e| Error::io(&cites_path, e))?;
    Ok(())
}
