//! Declarative run configuration, read from a TOML file and adjusted by
//! command-line flags.
//!
//! ```toml
//! seed = 0
//! out_dir = "out/cora"
//!
//! [dataset]
//! prefix = "data/cora/cora"   # reads cora.content and cora.cites
//! lcc = true
//!
//! [experiment]
//! fractions = [0.05, 0.5]
//! n_splits = 10
//! models = ["gcn_sym_bow", "gcn_asym_topo"]
//!
//! [gcn]
//! hidden = [32]
//! ```
//!
//! Relative paths are resolved against the working directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nodeclass::dataset::dataset_paths;
use nodeclass::neural::{Architecture, ModelSpec};
use nodeclass::propagation::{parse_words, AdjacencyWord, GcnInputBlocks, SecondNeighbors};
use nodeclass::topo::FeatureParams;
use nodeclass::EdgeDirection;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Train fractions swept by `experiment` unless configured otherwise.
pub const DEFAULT_FRACTIONS: [f64; 10] =
    [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.70];

/// A classifier together with the input it is trained on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    /// Symmetric-adjacency GCN on the bag-of-words features.
    GcnSymBow,
    /// Stacked-adjacency GCN on first and second neighbor class fractions.
    GcnAsymTopo,
    /// Symmetric-adjacency GCN on first and second neighbor class fractions.
    GcnSymTopo,
    /// Stacked convolution of the bag-of-words joined with the neighbor class
    /// fractions, followed by a stacked GCN.
    Combined,
    /// Feed-forward network on the z-scored topological measures.
    FfnTopology,
    /// Feed-forward network on first-neighbor class fractions.
    FfnNeighbors,
    /// Feed-forward network on adjacency-word products of the training-set
    /// one-hot class matrix.
    FfnProducts,
}

impl ModelChoice {
    pub const ALL: [ModelChoice; 7] = [
        ModelChoice::GcnSymBow,
        ModelChoice::GcnAsymTopo,
        ModelChoice::GcnSymTopo,
        ModelChoice::Combined,
        ModelChoice::FfnTopology,
        ModelChoice::FfnNeighbors,
        ModelChoice::FfnProducts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::GcnSymBow => "gcn_sym_bow",
            ModelChoice::GcnAsymTopo => "gcn_asym_topo",
            ModelChoice::GcnSymTopo => "gcn_sym_topo",
            ModelChoice::Combined => "combined",
            ModelChoice::FfnTopology => "ffn_topology",
            ModelChoice::FfnNeighbors => "ffn_neighbors",
            ModelChoice::FfnProducts => "ffn_products",
        }
    }

    pub fn architecture(self) -> Architecture {
        match self {
            ModelChoice::GcnSymBow | ModelChoice::GcnSymTopo => Architecture::GcnSym,
            ModelChoice::GcnAsymTopo => Architecture::GcnAsym,
            ModelChoice::Combined => Architecture::GcnCombined,
            ModelChoice::FfnTopology | ModelChoice::FfnNeighbors | ModelChoice::FfnProducts => {
                Architecture::Ffn
            }
        }
    }

    /// Whether the model reads the per-node bag-of-words.
    pub fn needs_bow(self) -> bool {
        matches!(self, ModelChoice::GcnSymBow | ModelChoice::Combined)
    }

    /// Whether the model reads the extracted topological measures.
    pub fn needs_topology(self) -> bool {
        self == ModelChoice::FfnTopology
    }
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ModelChoice::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ModelChoice::ALL.iter().map(|m| m.name()).collect();
                format!("unknown model `{s}`, expected one of {}", names.join(", "))
            })
    }
}

/// Hyperparameters overriding the built-in defaults of a model family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecOverrides {
    pub hidden: Option<Vec<usize>>,
    pub external_hidden: Option<usize>,
    pub dropout: Option<f64>,
    pub input_dropout: Option<bool>,
    pub l2: Option<f64>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub bias: Option<bool>,
}

impl SpecOverrides {
    pub fn apply(&self, mut spec: ModelSpec) -> ModelSpec {
        if let Some(h) = &self.hidden {
            spec.hidden = h.clone();
        }
        spec.external_hidden = self.external_hidden.unwrap_or(spec.external_hidden);
        spec.dropout = self.dropout.unwrap_or(spec.dropout);
        spec.input_dropout = self.input_dropout.unwrap_or(spec.input_dropout);
        spec.l2 = self.l2.unwrap_or(spec.l2);
        spec.learning_rate = self.learning_rate.unwrap_or(spec.learning_rate);
        spec.epochs = self.epochs.unwrap_or(spec.epochs);
        spec.bias = self.bias.unwrap_or(spec.bias);
        spec
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Path prefix expanded to `<prefix>.content` and `<prefix>.cites`.
    pub prefix: Option<PathBuf>,
    /// Explicit content file; takes precedence over `prefix`.
    pub content: Option<PathBuf>,
    /// Explicit cites file; takes precedence over `prefix`.
    pub cites: Option<PathBuf>,
    pub direction: EdgeDirection,
    /// Restrict to the largest weakly connected component.
    pub lcc: bool,
}

impl DatasetConfig {
    /// The content and cites files, or an error if neither a prefix nor both
    /// files are configured.
    pub fn paths(&self) -> Result<(PathBuf, PathBuf)> {
        let from_prefix = self.prefix.as_ref().map(dataset_paths);
        let content = self
            .content
            .clone()
            .or_else(|| from_prefix.as_ref().map(|p| p.0.clone()));
        let cites = self
            .cites
            .clone()
            .or_else(|| from_prefix.as_ref().map(|p| p.1.clone()));
        match (content, cites) {
            (Some(c), Some(e)) => Ok((c, e)),
            _ => Err(CliError::config(
                "no dataset given: pass --dataset PREFIX or set [dataset] prefix or content and cites",
            )),
        }
    }
}

/// Inputs derived from neighbor classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    /// Neighbor blocks fed to the topology GCNs.
    pub gcn_input: GcnInputBlocks,
    pub second_neighbors: SecondNeighbors,
    /// Adjacency words for `ffn_products`.
    pub words: Vec<String>,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            gcn_input: GcnInputBlocks::Both,
            second_neighbors: SecondNeighbors::Walks,
            words: ["A", "T", "AT", "TA", "AA", "TT"]
                .map(String::from)
                .to_vec(),
        }
    }
}

/// The train-fraction sweep of `experiment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub fractions: Vec<f64>,
    pub n_splits: usize,
    pub models: Vec<ModelChoice>,
    /// Model pairs compared by a Mann-Whitney test at every fraction.
    pub comparisons: Vec<[ModelChoice; 2]>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        use ModelChoice::*;
        SweepConfig {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            n_splits: 10,
            models: vec![GcnSymBow, GcnAsymTopo, GcnSymTopo, Combined],
            comparisons: vec![
                [Combined, GcnSymBow],
                [GcnAsymTopo, GcnSymTopo],
                [GcnAsymTopo, GcnSymBow],
            ],
        }
    }
}

/// A single model at a single train fraction, for `evaluate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub model: ModelChoice,
    pub fraction: f64,
    pub n_splits: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            model: ModelChoice::GcnAsymTopo,
            fraction: 0.5,
            n_splits: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed for splits and weight initialization.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Where extracted feature tables are cached; `<out_dir>/cache` if unset.
    pub cache_dir: Option<PathBuf>,
    pub dataset: DatasetConfig,
    pub features: FeatureParams,
    pub propagation: PropagationConfig,
    pub experiment: SweepConfig,
    pub evaluate: EvaluateConfig,
    /// Overrides for the GCN models.
    pub gcn: SpecOverrides,
    /// Overrides for the feed-forward models.
    pub ffn: SpecOverrides,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            cache_dir: None,
            dataset: DatasetConfig::default(),
            features: FeatureParams::default(),
            propagation: PropagationConfig::default(),
            experiment: SweepConfig::default(),
            evaluate: EvaluateConfig::default(),
            gcn: SpecOverrides::default(),
            ffn: SpecOverrides::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("cache"))
    }

    /// Hyperparameters of `model` before a split seed is assigned.
    pub fn spec_for(&self, model: ModelChoice) -> ModelSpec {
        let base = ModelSpec::for_architecture(model.architecture());
        match model.architecture() {
            Architecture::Ffn => self.ffn.apply(base),
            _ => self.gcn.apply(base),
        }
    }

    pub fn words(&self) -> Result<Vec<AdjacencyWord>> {
        parse_words(&self.propagation.words).map_err(|e| CliError::config(e.to_string()))
    }

    /// Checks value ranges and that the dataset files exist.
    pub fn validate(&self) -> Result<()> {
        let sweep = &self.experiment;
        for &f in sweep.fractions.iter().chain([&self.evaluate.fraction]) {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::config(format!(
                    "train fraction {f} is outside (0, 1)"
                )));
            }
        }
        if sweep.n_splits == 0 || self.evaluate.n_splits == 0 {
            return Err(CliError::config("n_splits must be at least 1"));
        }
        if sweep.models.is_empty() {
            return Err(CliError::config("no models selected"));
        }
        for pair in &sweep.comparisons {
            if pair.iter().any(|m| !sweep.models.contains(m)) {
                return Err(CliError::config(format!(
                    "comparison {} vs {} names a model that is not run",
                    pair[0], pair[1]
                )));
            }
        }
        self.words()?;
        for model in ModelChoice::ALL {
            self.spec_for(model)
                .validate()
                .map_err(|e| CliError::config(format!("{model}: {e}")))?;
        }
        let (content, cites) = self.dataset.paths()?;
        for path in [content, cites] {
            if !path.is_file() {
                return Err(CliError::Data(format!(
                    "{}: file not found",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_documented_grid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.experiment.fractions.len(), 10);
        assert!(c.experiment.fractions.contains(&0.15) && c.experiment.fractions.contains(&0.25));
        assert_eq!(c.spec_for(ModelChoice::FfnTopology).hidden, vec![300, 100]);
        assert_eq!(
            c.spec_for(ModelChoice::GcnAsymTopo).architecture,
            Architecture::GcnAsym
        );
    }

    #[test]
    fn toml_overrides_apply() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 7
            [dataset]
            prefix = "data/cora"
            lcc = true
            [experiment]
            fractions = [0.3]
            models = ["combined", "gcn_sym_bow"]
            comparisons = [["combined", "gcn_sym_bow"]]
            [gcn]
            hidden = [32]
            epochs = 5
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert!(c.dataset.lcc);
        let (content, cites) = c.dataset.paths().unwrap();
        assert_eq!(content, PathBuf::from("data/cora.content"));
        assert_eq!(cites, PathBuf::from("data/cora.cites"));
        let spec = c.spec_for(ModelChoice::Combined);
        assert_eq!((spec.hidden, spec.epochs, spec.l2), (vec![32], 5, 0.001));
        assert_eq!(c.spec_for(ModelChoice::FfnNeighbors).epochs, 200);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(ExperimentConfig::from_toml("colour = 1").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\nmodels = [\"svm\"]").is_err());
        let mut c = ExperimentConfig::default();
        c.experiment.fractions = vec![1.0];
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
        let mut c = ExperimentConfig::default();
        c.experiment.models = vec![ModelChoice::GcnSymBow];
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let mut c = ExperimentConfig::default();
        c.dataset.prefix = Some("/nonexistent/cora".into());
        let err = c.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/cora.content"));
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelChoice::ALL {
            assert_eq!(m.name().parse::<ModelChoice>().unwrap(), m);
        }
        assert!("svm".parse::<ModelChoice>().is_err());
    }
}
