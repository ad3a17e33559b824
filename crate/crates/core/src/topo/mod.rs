//! Per-node topological measures and their assembly into a feature table.
//!
//! Every measure treats edges as unit length and imputes 0 where a quantity is
//! undefined (isolated nodes, empty reachable sets), so the table never holds
//! NaN or infinities.

mod bfs;
pub mod centrality;
pub mod fiedler;
pub mod flow;
pub mod kcore;
pub mod louvain;
pub mod motifs;
pub mod pagerank;
mod table;

pub use centrality::{
    average_neighbor_degree, betweenness_centrality, bfs_moments, closeness_centrality,
    degree_features, eccentricity, load_centrality,
};
pub use fiedler::{fiedler_vector, fiedler_with_value};
pub use flow::{attraction_basin, flow};
pub use kcore::k_core;
pub use louvain::{louvain, louvain_features, modularity, Communities};
pub use motifs::{motif_counts, MotifCatalog, MotifMode};
pub use pagerank::pagerank;
pub use table::{extract_all, extract_raw, zscore, FeatureParams, FeatureTable};
