//! Builds the input of each model choice for a split and trains it.

use nodeclass::neural::{
    normalize_adjacency, train_combined, train_ffn, train_gcn, AdjacencyMode, Inputs,
    NormalizedAdjacency, TrainedModel,
};
use nodeclass::propagation::{
    adjacency_products, gcn_input_with, train_one_hot, AdjacencyWord, GcnInputBlocks,
};
use nodeclass::stats::accuracy;
use nodeclass::topo::FeatureTable;
use nodeclass::{DenseMatrix, LabeledDataset, SplitMask};

use crate::config::{ExperimentConfig, ModelChoice};
use crate::data::bag_of_words;
use crate::error::{CliError, Result};

/// A trained model with its posteriors over every node.
pub struct Fit {
    pub model: TrainedModel,
    pub posteriors: DenseMatrix,
    /// Accuracy on the split's test nodes.
    pub accuracy: f64,
}

/// Split-independent inputs shared by every training run on one dataset.
pub struct Workbench<'a> {
    pub dataset: &'a LabeledDataset,
    config: &'a ExperimentConfig,
    symmetric: NormalizedAdjacency,
    stacked: NormalizedAdjacency,
    bow: Option<DenseMatrix>,
    topology: Option<DenseMatrix>,
    words: Vec<AdjacencyWord>,
}

impl<'a> Workbench<'a> {
    /// `features` holds raw topological measures; it is only needed by
    /// [`ModelChoice::FfnTopology`] and is z-scored here.
    pub fn new(
        dataset: &'a LabeledDataset,
        config: &'a ExperimentConfig,
        features: Option<&FeatureTable>,
    ) -> Result<Self> {
        Ok(Workbench {
            dataset,
            config,
            symmetric: normalize_adjacency(&dataset.graph, AdjacencyMode::Symmetric),
            stacked: normalize_adjacency(&dataset.graph, AdjacencyMode::Asymmetric),
            bow: bag_of_words(dataset).ok(),
            topology: features.map(|t| t.normalized().to_matrix()),
            words: config.words()?,
        })
    }

    /// Fails early if a model's inputs are unavailable.
    pub fn check(&self, model: ModelChoice) -> Result<()> {
        if model.needs_bow() && self.bow.is_none() {
            return Err(CliError::Data(format!(
                "{model} needs word features but the dataset has none"
            )));
        }
        if model.needs_topology() && self.topology.is_none() {
            return Err(CliError::config(format!(
                "{model} needs extracted topological features"
            )));
        }
        Ok(())
    }

    fn bow(&self, model: ModelChoice) -> Result<&DenseMatrix> {
        self.check(model)?;
        Ok(self.bow.as_ref().expect("checked"))
    }

    /// Trains `model` on `mask` with the split seed as initialization seed.
    pub fn fit(&self, model: ModelChoice, mask: &SplitMask) -> Result<Fit> {
        let ds = self.dataset;
        let labels = &ds.labels;
        let spec = self.config.spec_for(model).with_seed(mask.seed);
        let prop = &self.config.propagation;
        let topo_input = || gcn_input_with(ds, mask, prop.gcn_input, prop.second_neighbors);
        let (trained, posteriors) = match model {
            ModelChoice::GcnSymBow => {
                let x = self.bow(model)?;
                let m = train_gcn(&self.symmetric, x, labels, mask, &spec)?;
                let p = m.predict(&Inputs::graph(&self.symmetric, x))?;
                (m, p)
            }
            ModelChoice::GcnAsymTopo | ModelChoice::GcnSymTopo => {
                let adj = if model == ModelChoice::GcnAsymTopo {
                    &self.stacked
                } else {
                    &self.symmetric
                };
                let x = topo_input();
                let m = train_gcn(adj, &x, labels, mask, &spec)?;
                let p = m.predict(&Inputs::graph(adj, &x))?;
                (m, p)
            }
            ModelChoice::Combined => {
                let external = self.bow(model)?;
                let x = topo_input();
                let m = train_combined(&self.stacked, &x, external, labels, mask, &spec)?;
                let p = m.predict(&Inputs::combined(&self.stacked, &x, external))?;
                (m, p)
            }
            ModelChoice::FfnTopology => {
                self.check(model)?;
                let x = self.topology.as_ref().expect("checked");
                dense_fit(x, labels, mask, &spec)?
            }
            ModelChoice::FfnNeighbors => {
                let x = gcn_input_with(ds, mask, GcnInputBlocks::First, prop.second_neighbors);
                dense_fit(&x, labels, mask, &spec)?
            }
            ModelChoice::FfnProducts => {
                let v = train_one_hot(ds, mask);
                let x = adjacency_products(&ds.graph, &v.values, &self.words)?.map(f64::ln_1p);
                dense_fit(&x, labels, mask, &spec)?
            }
        };
        let accuracy = accuracy(&posteriors, labels, &mask.test)?;
        Ok(Fit {
            model: trained,
            posteriors,
            accuracy,
        })
    }
}

fn dense_fit(
    x: &DenseMatrix,
    labels: &[usize],
    mask: &SplitMask,
    spec: &nodeclass::neural::ModelSpec,
) -> Result<(TrainedModel, DenseMatrix)> {
    let m = train_ffn(x, labels, mask, spec)?;
    let p = m.predict(&Inputs::dense(x))?;
    Ok((m, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nodeclass::make_splits;
    use nodeclass::synthetic::{citation_dataset, CitationParams};
    use nodeclass::topo::{extract_raw, FeatureParams};

    #[test]
    fn every_model_trains_on_a_small_graph() {
        let ds = citation_dataset(
            &CitationParams {
                n_nodes: 60,
                ..CitationParams::default()
            },
            3,
        );
        let mut config = ExperimentConfig::default();
        config.gcn.epochs = Some(20);
        config.ffn.epochs = Some(20);
        config.ffn.hidden = Some(vec![16]);
        let fp = FeatureParams {
            include_motif4: false,
            ..FeatureParams::default()
        };
        let features = extract_raw(&ds.graph, &fp).unwrap();
        let bench = Workbench::new(&ds, &config, Some(&features)).unwrap();
        let mask = &make_splits(ds.n_nodes(), 0.5, 1, 9).unwrap()[0];
        for model in ModelChoice::ALL {
            let fit = bench.fit(model, mask).unwrap();
            assert_eq!(fit.posteriors.shape(), (60, ds.n_classes));
            assert!((0.0..=1.0).contains(&fit.accuracy));
            assert_eq!(fit.model.spec.seed, 9);
            let again = bench.fit(model, mask).unwrap();
            assert_eq!(fit.posteriors, again.posteriors, "{model}");
        }
    }

    #[test]
    fn missing_inputs_are_reported() {
        let ds = citation_dataset(&CitationParams::default(), 1);
        let mut bare = ds.clone();
        bare.external_features = None;
        let config = ExperimentConfig::default();
        let bench = Workbench::new(&bare, &config, None).unwrap();
        assert_eq!(
            bench.check(ModelChoice::GcnSymBow).unwrap_err().exit_code(),
            2
        );
        assert_eq!(
            bench
                .check(ModelChoice::FfnTopology)
                .unwrap_err()
                .exit_code(),
            1
        );
        assert!(bench.check(ModelChoice::GcnAsymTopo).is_ok());
    }
}
