//! Rank tests, neighbor-class correlation and accuracy bookkeeping.

mod correlation;
mod eval;
mod rank;

pub use correlation::{class_correlation, ClassCorrelation, EdgeView};
pub use eval::{accuracy, evaluate, mean_std, EvalReport};
pub use rank::{average_ranks, kruskal_wallis, mann_whitney, KruskalWallis, MannWhitney};
