//! Node classification on directed graphs.
//!
//! Three families of inputs are provided for predicting node classes:
//!
//! - per-node topological measures ([`topo`]),
//! - counts of training-set neighbor classes and their propagation through
//!   products of the adjacency matrix and its transpose ([`propagation`]),
//! - graph convolutional networks over either the symmetrized adjacency or the
//!   stacked `[A; Aᵀ]` pair, optionally fused with external node features
//!   ([`neural`]).
//!
//! [`stats`] holds the rank tests and accuracy bookkeeping used to compare them.

pub mod dataset;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod neural;
pub mod propagation;
pub mod sparse;
pub mod stats;
pub mod synthetic;
pub mod topo;

pub use dataset::{
    largest_connected_subgraph, load_citation_dataset, make_splits, EdgeDirection, LabeledDataset,
    LoadReport, SplitMask,
};
pub use error::{Error, Result};
pub use graph::DirectedGraph;
pub use matrix::DenseMatrix;
pub use sparse::CsrMatrix;
