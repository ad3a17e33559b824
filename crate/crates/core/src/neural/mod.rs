//! Dense neural classifiers trained full-batch with Adam.
//!
//! Three families share one layer stack: dense feed-forward networks, graph
//! convolutions over the symmetrized adjacency, and convolutions over the
//! forward/backward pair whose `2n × o` output is folded to `n × 2o` so edge
//! direction survives. A combined variant convolves external features first and
//! concatenates them with the topology input.

mod adjacency;
mod network;
mod spec;
mod train;

pub use adjacency::{
    fold_stacked, gcn_layer, normalize_adjacency, unstack, Activation, AdjacencyMode,
    NormalizedAdjacency,
};
pub use network::{softmax, Inputs, Layer, Network, Propagation};
pub use spec::{Architecture, ModelSpec};
pub use train::{predict, train_combined, train_ffn, train_gcn, TrainedModel};
