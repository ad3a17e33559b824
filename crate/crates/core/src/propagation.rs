//! Training-label propagation inputs.
//!
//! `V` holds, for every node, how many of its training-set neighbors fall in
//! each class, plus a trailing constant column. Multiplying one-hot class
//! matrices by words over `{A, Aᵀ}` counts class-colored subgraphs: applied to
//! the constant column, `A` counts out-edges, `A·A` counts two-step walks, and
//! so on.

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, SplitMask};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseMatrix;
use crate::sparse::CsrMatrix;

/// Node × (C + 1) matrix: class counts followed by a constant 1 column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCountMatrix {
    pub n_classes: usize,
    pub values: DenseMatrix,
}

impl ClassCountMatrix {
    fn zeros(n_nodes: usize, n_classes: usize) -> Self {
        let mut values = DenseMatrix::zeros(n_nodes, n_classes + 1);
        for i in 0..n_nodes {
            values[(i, n_classes)] = 1.0;
        }
        ClassCountMatrix { n_classes, values }
    }

    pub fn n_nodes(&self) -> usize {
        self.values.rows()
    }

    /// The class-count block without the constant column.
    pub fn counts(&self) -> DenseMatrix {
        self.values.hsplit(self.n_classes).0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// Predecessors (`v → i`).
    In,
    /// Successors (`i → v`).
    Out,
    /// Distinct neighbors in either direction.
    #[default]
    Both,
}

/// How second neighbors are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondNeighbors {
    /// Every undirected walk `i – j – k` with `k ≠ i` counts once.
    #[default]
    Walks,
    /// Each distinct node at the end of such a walk counts once.
    Distinct,
}

/// Counts, per node, the training-set neighbors of each class.
pub fn build_v(
    ds: &LabeledDataset,
    mask: &SplitMask,
    neighborhood: Neighborhood,
) -> ClassCountMatrix {
    let g = &ds.graph;
    let mut v = ClassCountMatrix::zeros(ds.n_nodes(), ds.n_classes);
    for i in 0..ds.n_nodes() {
        let neighbors: Vec<usize> = match neighborhood {
            Neighborhood::In => g.in_neighbors(i).to_vec(),
            Neighborhood::Out => g.out_neighbors(i).to_vec(),
            Neighborhood::Both => g.undirected_neighbors(i),
        };
        for u in neighbors {
            if u != i && mask.is_train(u) {
                v.values[(i, ds.labels[u])] += 1.0;
            }
        }
    }
    v
}

/// One-hot class of each training node (test nodes are all-zero), plus the
/// constant column. This is the colored input on which adjacency words act.
pub fn train_one_hot(ds: &LabeledDataset, mask: &SplitMask) -> ClassCountMatrix {
    let mut v = ClassCountMatrix::zeros(ds.n_nodes(), ds.n_classes);
    for &u in &mask.train {
        v.values[(u, ds.labels[u])] = 1.0;
    }
    v
}

/// Counts training-set nodes of each class at the far end of undirected
/// length-2 walks, excluding walks that return to the start.
pub fn second_neighbor_counts(
    ds: &LabeledDataset,
    mask: &SplitMask,
    mode: SecondNeighbors,
) -> ClassCountMatrix {
    let adj = ds.graph.undirected_adjacency();
    let mut v = ClassCountMatrix::zeros(ds.n_nodes(), ds.n_classes);
    let mut mark = vec![usize::MAX; ds.n_nodes()];
    for i in 0..ds.n_nodes() {
        for &j in &adj[i] {
            for &k in &adj[j] {
                if k == i || !mask.is_train(k) {
                    continue;
                }
                if mode == SecondNeighbors::Distinct {
                    if mark[k] == i {
                        continue;
                    }
                    mark[k] = i;
                }
                v.values[(i, ds.labels[k])] += 1.0;
            }
        }
    }
    v
}

/// A product of adjacency factors, read left to right: `"AT"` is `A·Aᵀ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AdjacencyWord(Vec<Factor>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Factor {
    A,
    T,
}

impl std::str::FromStr for AdjacencyWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 3 {
            return Err(Error::invalid(format!(
                "adjacency word `{s}` must have 1 to 3 letters"
            )));
        }
        s.chars()
            .map(|c| match c {
                'A' => Ok(Factor::A),
                'T' => Ok(Factor::T),
                other => Err(Error::invalid(format!(
                    "adjacency word `{s}`: unknown symbol `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(AdjacencyWord)
    }
}

impl TryFrom<String> for AdjacencyWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AdjacencyWord> for String {
    fn from(w: AdjacencyWord) -> String {
        w.to_string()
    }
}

impl std::fmt::Display for AdjacencyWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for factor in &self.0 {
            f.write_str(match factor {
                Factor::A => "A",
                Factor::T => "T",
            })?;
        }
        Ok(())
    }
}

/// The words used by default: every direction pattern of length 1 and 2.
pub fn default_words() -> Vec<AdjacencyWord> {
    ["A", "T", "AT", "TA", "AA", "TT"]
        .iter()
        .map(|w| w.parse().expect("valid word"))
        .collect()
}

/// Parses a list of words, failing on the first invalid one.
pub fn parse_words<S: AsRef<str>>(words: &[S]) -> Result<Vec<AdjacencyWord>> {
    words.iter().map(|w| w.as_ref().parse()).collect()
}

/// `[M_w₁·X | M_w₂·X | …]` where `M_w` multiplies the word's factors. Each
/// product is evaluated right to left as sparse × dense, so no `n × n` dense
/// matrix is ever formed.
pub fn adjacency_products(
    g: &DirectedGraph,
    x: &DenseMatrix,
    words: &[AdjacencyWord],
) -> Result<DenseMatrix> {
    let a = CsrMatrix::adjacency(g);
    let at = a.transpose();
    let blocks = words
        .iter()
        .map(|w| {
            w.0.iter().rev().try_fold(x.clone(), |acc, f| match f {
                Factor::A => a.matmul_dense(&acc),
                Factor::T => at.matmul_dense(&acc),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::hconcat_all(&blocks)
}

/// Which neighbor blocks make up the GCN input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcnInputBlocks {
    First,
    Second,
    #[default]
    Both,
}

/// Topology-only GCN input: first-neighbor and second-neighbor class counts,
/// each row-normalized to class fractions and concatenated column-wise. The
/// constant column of each block stays at 1.
pub fn gcn_input(ds: &LabeledDataset, mask: &SplitMask) -> DenseMatrix {
    gcn_input_with(ds, mask, GcnInputBlocks::Both, SecondNeighbors::Walks)
}

pub fn gcn_input_with(
    ds: &LabeledDataset,
    mask: &SplitMask,
    blocks: GcnInputBlocks,
    second: SecondNeighbors,
) -> DenseMatrix {
    let first = || normalize_block(&build_v(ds, mask, Neighborhood::Both));
    let second = || normalize_block(&second_neighbor_counts(ds, mask, second));
    match blocks {
        GcnInputBlocks::First => first(),
        GcnInputBlocks::Second => second(),
        GcnInputBlocks::Both => first().hconcat(&second()).expect("same row count"),
    }
}

/// Row-normalizes the class counts and keeps the constant column at 1.
fn normalize_block(v: &ClassCountMatrix) -> DenseMatrix {
    let c = v.n_classes;
    let mut out = v.values.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let s: f64 = row[..c].iter().sum();
        if s > 0.0 {
            row[..c].iter_mut().for_each(|x| *x /= s);
        }
    }
    out
}
