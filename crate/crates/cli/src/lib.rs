//! Experiment runner for node classification on citation graphs.
//!
//! Subcommands write data tables only:
//!
//! - `features`: z-scored topological measures per node,
//! - `stats`: per-feature Kruskal-Wallis tests, per-class feature profiles and
//!   the neighbor class correlation matrix,
//! - `experiment`: test accuracy over a grid of train fractions and models,
//!   with Mann-Whitney comparisons between model pairs,
//! - `evaluate`: one model at one train fraction, with its trained weights and
//!   posteriors.
//!
//! Every output directory holds the resolved `config.toml` and a
//! `manifest.json`; rerunning with that configuration reproduces the tables
//! byte for byte.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod models;

pub use commands::{
    cmd_evaluate, cmd_experiment, cmd_features, cmd_stats, experiment, run_sweep, stats, Sweep,
};
pub use config::{ExperimentConfig, ModelChoice};
pub use error::CliError;
