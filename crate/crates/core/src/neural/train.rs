use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adjacency::{AdjacencyMode, NormalizedAdjacency};
use super::network::{Inputs, Network};
use super::spec::{Architecture, ModelSpec};
use crate::dataset::SplitMask;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Adam update state over a flat parameter vector.
struct Adam {
    lr: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
        }
    }
}

/// A fitted network together with its hyperparameters and per-epoch loss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub network: Network,
    pub loss_trace: Vec<f64>,
}

impl TrainedModel {
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)
            .map_err(|e| Error::invalid(format!("cannot serialize model: {e}")))
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        serde_json::from_reader(reader)
            .map_err(|e| Error::invalid(format!("cannot read model: {e}")))
    }

    /// Class posteriors for every node.
    pub fn predict(&self, inputs: &Inputs) -> Result<DenseMatrix> {
        self.network.predict(inputs)
    }
}

/// Class posteriors of `model` on `inputs`; each row sums to 1.
pub fn predict(model: &TrainedModel, inputs: &Inputs) -> Result<DenseMatrix> {
    model.predict(inputs)
}

fn n_classes(labels: &[usize]) -> Result<usize> {
    labels
        .iter()
        .max()
        .map(|m| m + 1)
        .ok_or_else(|| Error::invalid("no labels"))
}

/// Full-batch training: one dropout draw and one Adam step per epoch.
fn fit(
    spec: &ModelSpec,
    inputs: &Inputs,
    labels: &[usize],
    mask: &SplitMask,
) -> Result<TrainedModel> {
    spec.validate()?;
    if mask.n_nodes() != labels.len() {
        return Err(Error::shape(format!(
            "mask covers {} nodes, {} labels given",
            mask.n_nodes(),
            labels.len()
        )));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    dropout_rng.set_stream(1);

    let external_width = inputs.external.map_or(0, DenseMatrix::cols);
    let mut network = Network::new(
        spec,
        inputs.features.cols(),
        external_width,
        n_classes(labels)?,
        &mut init_rng,
    )?;
    let mut params = network.parameters();
    let mut adam = Adam::new(params.len(), spec.learning_rate);
    let mut loss_trace = Vec::with_capacity(spec.epochs);
    let sparse = network.sparse_input(inputs);
    for epoch in 0..spec.epochs {
        let (loss, grad) = network.loss_and_gradient_with(
            inputs,
            sparse.as_ref(),
            labels,
            &mask.train,
            spec.l2,
            Some(&mut dropout_rng),
        )?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { epoch });
        }
        adam.step(&mut params, &grad);
        network.set_parameters(&params);
        loss_trace.push(loss);
    }
    Ok(TrainedModel {
        spec: spec.clone(),
        network,
        loss_trace,
    })
}

fn expect_architecture(spec: &ModelSpec, allowed: &[Architecture]) -> Result<()> {
    if allowed.contains(&spec.architecture) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "architecture {:?} is not one of {allowed:?}",
            spec.architecture
        )))
    }
}

fn expect_rows(m: &DenseMatrix, n: usize, what: &str) -> Result<()> {
    if m.rows() == n {
        Ok(())
    } else {
        Err(Error::shape(format!(
            "{what} has {} rows, expected {n}",
            m.rows()
        )))
    }
}

/// Dense classifier on per-node features.
pub fn train_ffn(
    features: &DenseMatrix,
    labels: &[usize],
    mask: &SplitMask,
    spec: &ModelSpec,
) -> Result<TrainedModel> {
    expect_architecture(spec, &[Architecture::Ffn])?;
    expect_rows(features, labels.len(), "feature matrix")?;
    fit(spec, &Inputs::dense(features), labels, mask)
}

/// Graph convolutional classifier; the adjacency mode must match the
/// architecture.
pub fn train_gcn(
    adj: &NormalizedAdjacency,
    input: &DenseMatrix,
    labels: &[usize],
    mask: &SplitMask,
    spec: &ModelSpec,
) -> Result<TrainedModel> {
    expect_architecture(spec, &[Architecture::GcnSym, Architecture::GcnAsym])?;
    check_mode(adj, spec)?;
    expect_rows(input, labels.len(), "input")?;
    fit(spec, &Inputs::graph(adj, input), labels, mask)
}

/// Stacked convolution over `external`, concatenated with `topology`, then a
/// stacked convolution stack.
pub fn train_combined(
    adj: &NormalizedAdjacency,
    topology: &DenseMatrix,
    external: &DenseMatrix,
    labels: &[usize],
    mask: &SplitMask,
    spec: &ModelSpec,
) -> Result<TrainedModel> {
    expect_architecture(spec, &[Architecture::GcnCombined])?;
    check_mode(adj, spec)?;
    expect_rows(topology, labels.len(), "topology input")?;
    expect_rows(external, labels.len(), "external features")?;
    fit(
        spec,
        &Inputs::combined(adj, topology, external),
        labels,
        mask,
    )
}

fn check_mode(adj: &NormalizedAdjacency, spec: &ModelSpec) -> Result<()> {
    let need = match spec.architecture {
        Architecture::GcnSym => AdjacencyMode::Symmetric,
        _ => AdjacencyMode::Asymmetric,
    };
    if adj.mode() == need {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{:?} needs a {need:?} adjacency, got {:?}",
            spec.architecture,
            adj.mode()
        )))
    }
}
