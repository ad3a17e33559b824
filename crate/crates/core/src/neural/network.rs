//! Layer stack with a hand-written backward pass.

use std::borrow::Cow;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adjacency::{Activation, AdjacencyMode, NormalizedAdjacency};
use super::spec::{Architecture, ModelSpec};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::sparse::CsrMatrix;

/// How a layer mixes rows after the weight multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Plain dense layer.
    None,
    /// `S · X W`.
    Symmetric,
    /// `[fwd · X W | bwd · X W]`: the stacked `2n × o` output already folded
    /// to `n × 2o`.
    Stacked,
    /// `fwd · X W + bwd · X W`, used for the output layer of stacked models so
    /// that it yields one score per class.
    StackedSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub propagation: Propagation,
    pub activation: Activation,
    pub dropout: f64,
    pub weight: DenseMatrix,
    pub bias: Option<Vec<f64>>,
}

/// Inputs a network is evaluated on.
#[derive(Clone, Copy, Debug)]
pub struct Inputs<'a> {
    pub adj: Option<&'a NormalizedAdjacency>,
    /// Per-node features (the topology input for combined models).
    pub features: &'a DenseMatrix,
    /// External features of combined models.
    pub external: Option<&'a DenseMatrix>,
}

impl<'a> Inputs<'a> {
    pub fn dense(features: &'a DenseMatrix) -> Self {
        Inputs {
            adj: None,
            features,
            external: None,
        }
    }

    pub fn graph(adj: &'a NormalizedAdjacency, features: &'a DenseMatrix) -> Self {
        Inputs {
            adj: Some(adj),
            features,
            external: None,
        }
    }

    pub fn combined(
        adj: &'a NormalizedAdjacency,
        topology: &'a DenseMatrix,
        external: &'a DenseMatrix,
    ) -> Self {
        Inputs {
            adj: Some(adj),
            features: topology,
            external: Some(external),
        }
    }

    fn n_rows(&self) -> usize {
        self.features.rows()
    }
}

/// Network inputs at or below this share of nonzero entries are multiplied
/// in sparse form.
const SPARSE_INPUT_DENSITY: f64 = 0.1;

/// The (dropped-out) input a layer multiplied by its weight.
enum LayerInput {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

struct Cache {
    input: LayerInput,
    keep: Option<Vec<f64>>,
    z: DenseMatrix,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-limit..=limit))
        .collect();
    DenseMatrix::from_vec(rows, cols, data).expect("sized data")
}

impl Layer {
    fn new(
        input: usize,
        output: usize,
        propagation: Propagation,
        activation: Activation,
        dropout: f64,
        bias: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut layer = Layer {
            propagation,
            activation,
            dropout,
            weight: glorot(input, output, rng),
            bias: None,
        };
        if bias {
            layer.bias = Some(vec![0.0; layer.output_width()]);
        }
        layer
    }

    pub fn input_width(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_width(&self) -> usize {
        match self.propagation {
            Propagation::Stacked => 2 * self.weight.cols(),
            _ => self.weight.cols(),
        }
    }

    fn n_parameters(&self) -> usize {
        self.weight.data().len() + self.bias.as_ref().map_or(0, Vec::len)
    }

    fn adjacency<'a>(
        &self,
        adj: Option<&'a NormalizedAdjacency>,
    ) -> Result<&'a NormalizedAdjacency> {
        let need = match self.propagation {
            Propagation::None => unreachable!("dense layers take no adjacency"),
            Propagation::Symmetric => AdjacencyMode::Symmetric,
            Propagation::Stacked | Propagation::StackedSum => AdjacencyMode::Asymmetric,
        };
        match adj {
            Some(a) if a.mode() == need => Ok(a),
            Some(a) => Err(Error::invalid(format!(
                "layer needs a {need:?} adjacency, got {:?}",
                a.mode()
            ))),
            None => Err(Error::invalid("graph layer evaluated without an adjacency")),
        }
    }

    /// `sparse` is the CSR form of `x` for a layer fed directly by a sparse
    /// network input. Such a layer never returns an input gradient and draws
    /// dropout only for the stored entries.
    fn forward(
        &self,
        x: &DenseMatrix,
        sparse: Option<&CsrMatrix>,
        adj: Option<&NormalizedAdjacency>,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(DenseMatrix, Cache)> {
        if let Some(sparse) = sparse {
            let mut input = sparse.clone();
            if let Some(rng) = rng.filter(|_| self.dropout > 0.0) {
                let scale = 1.0 / (1.0 - self.dropout);
                for v in input.values_mut() {
                    *v *= if rng.random::<f64>() < self.dropout {
                        0.0
                    } else {
                        scale
                    };
                }
            }
            let p = input.matmul_dense(&self.weight)?;
            let (out, z) = self.finish_forward(p, adj)?;
            return Ok((
                out,
                Cache {
                    input: LayerInput::Sparse(input),
                    keep: None,
                    z,
                },
            ));
        }
        let (input, keep) = match rng {
            Some(rng) if self.dropout > 0.0 => {
                let scale = 1.0 / (1.0 - self.dropout);
                let keep: Vec<f64> = (0..x.data().len())
                    .map(|_| {
                        if rng.random::<f64>() < self.dropout {
                            0.0
                        } else {
                            scale
                        }
                    })
                    .collect();
                let mut input = x.clone();
                input
                    .data_mut()
                    .iter_mut()
                    .zip(&keep)
                    .for_each(|(v, k)| *v *= k);
                (input, Some(keep))
            }
            _ => (x.clone(), None),
        };
        let p = input.matmul(&self.weight)?;
        let (out, z) = self.finish_forward(p, adj)?;
        Ok((
            out,
            Cache {
                input: LayerInput::Dense(input),
                keep,
                z,
            },
        ))
    }

    /// Propagation, bias and activation applied to `p = X W`.
    fn finish_forward(
        &self,
        p: DenseMatrix,
        adj: Option<&NormalizedAdjacency>,
    ) -> Result<(DenseMatrix, DenseMatrix)> {
        let mut z = match self.propagation {
            Propagation::None => p,
            Propagation::Symmetric => self.adjacency(adj)?.fwd().matmul_dense(&p)?,
            Propagation::Stacked => {
                let a = self.adjacency(adj)?;
                let bwd = a.bwd().expect("asymmetric mode");
                a.fwd().matmul_dense(&p)?.hconcat(&bwd.matmul_dense(&p)?)?
            }
            Propagation::StackedSum => {
                let a = self.adjacency(adj)?;
                let mut z = a.fwd().matmul_dense(&p)?;
                z.add_assign(&a.bwd().expect("asymmetric mode").matmul_dense(&p)?);
                z
            }
        };
        if let Some(b) = &self.bias {
            for i in 0..z.rows() {
                z.row_mut(i).iter_mut().zip(b).for_each(|(v, bj)| *v += bj);
            }
        }
        let out = z.map(|v| self.activation.apply(v));
        Ok((out, z))
    }

    /// Returns the weight and bias gradients, and the input gradient when
    /// `need_input` is set.
    fn backward(
        &self,
        cache: &Cache,
        d_out: DenseMatrix,
        adj: Option<&NormalizedAdjacency>,
        need_input: bool,
    ) -> Result<(DenseMatrix, Option<Vec<f64>>, Option<DenseMatrix>)> {
        let mut dz = d_out;
        if self.activation == Activation::Relu {
            dz.data_mut()
                .iter_mut()
                .zip(cache.z.data())
                .for_each(|(d, &z)| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
        }
        let d_bias = self.bias.as_ref().map(|b| {
            let mut s = vec![0.0; b.len()];
            for i in 0..dz.rows() {
                s.iter_mut().zip(dz.row(i)).for_each(|(a, d)| *a += d);
            }
            s
        });
        let dp = match self.propagation {
            Propagation::None => dz,
            Propagation::Symmetric => self.adjacency(adj)?.fwd_t().matmul_dense(&dz)?,
            Propagation::Stacked => {
                let a = self.adjacency(adj)?;
                let (top, bottom) = dz.hsplit(self.weight.cols());
                let mut dp = a.fwd_t().matmul_dense(&top)?;
                dp.add_assign(&a.bwd_t().expect("asymmetric mode").matmul_dense(&bottom)?);
                dp
            }
            Propagation::StackedSum => {
                let a = self.adjacency(adj)?;
                let mut dp = a.fwd_t().matmul_dense(&dz)?;
                dp.add_assign(&a.bwd_t().expect("asymmetric mode").matmul_dense(&dz)?);
                dp
            }
        };
        let d_weight = match &cache.input {
            LayerInput::Dense(x) => x.t_matmul(&dp)?,
            LayerInput::Sparse(x) => x.t_matmul_dense(&dp)?,
        };
        let d_input = if need_input {
            if matches!(cache.input, LayerInput::Sparse(_)) {
                return Err(Error::invalid(
                    "input gradient requested for a network input layer",
                ));
            }
            let mut dx = dp.matmul_t(&self.weight)?;
            if let Some(keep) = &cache.keep {
                dx.data_mut()
                    .iter_mut()
                    .zip(keep)
                    .for_each(|(d, k)| *d *= k);
            }
            Some(dx)
        } else {
            None
        };
        Ok((d_weight, d_bias, d_input))
    }
}

/// A feed-forward stack. Combined models first run `branch` on the external
/// features and concatenate its output in front of the per-node features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub branch: Vec<Layer>,
    pub trunk: Vec<Layer>,
    pub n_classes: usize,
}

impl Network {
    /// Builds the layer stack for `spec` with Glorot-uniform weights.
    pub fn new(
        spec: &ModelSpec,
        input_width: usize,
        external_width: usize,
        n_classes: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        spec.validate()?;
        if n_classes == 0 {
            return Err(Error::invalid("need at least one class"));
        }
        let first_dropout = if spec.input_dropout {
            spec.dropout
        } else {
            0.0
        };
        let mut branch = Vec::new();
        let mut width = input_width;
        let mut first = true;
        if spec.architecture == Architecture::GcnCombined {
            branch.push(Layer::new(
                external_width,
                spec.external_hidden,
                Propagation::Stacked,
                Activation::Relu,
                first_dropout,
                spec.bias,
                rng,
            ));
            width += 2 * spec.external_hidden;
            first = false;
        }
        let (hidden_prop, out_prop) = match spec.architecture {
            Architecture::Ffn => (Propagation::None, Propagation::None),
            Architecture::GcnSym => (Propagation::Symmetric, Propagation::Symmetric),
            Architecture::GcnAsym | Architecture::GcnCombined => {
                (Propagation::Stacked, Propagation::StackedSum)
            }
        };
        let mut trunk = Vec::new();
        for &h in &spec.hidden {
            let dropout = if first { first_dropout } else { spec.dropout };
            let layer = Layer::new(
                width,
                h,
                hidden_prop,
                Activation::Relu,
                dropout,
                spec.bias,
                rng,
            );
            width = layer.output_width();
            trunk.push(layer);
            first = false;
        }
        let dropout = if first { first_dropout } else { spec.dropout };
        trunk.push(Layer::new(
            width,
            n_classes,
            out_prop,
            Activation::Identity,
            dropout,
            spec.bias,
            rng,
        ));
        Ok(Network {
            branch,
            trunk,
            n_classes,
        })
    }

    fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.branch.iter().chain(&self.trunk)
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Layer> {
        self.branch.iter_mut().chain(&mut self.trunk)
    }

    pub fn n_parameters(&self) -> usize {
        self.layers().map(Layer::n_parameters).sum()
    }

    /// Every weight and bias in layer order (branch first), each layer's
    /// weight row-major followed by its bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_parameters());
        for l in self.layers() {
            out.extend_from_slice(l.weight.data());
            if let Some(b) = &l.bias {
                out.extend_from_slice(b);
            }
        }
        out
    }

    pub fn set_parameters(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.n_parameters());
        let mut rest = values;
        for l in self.layers_mut() {
            let w = l.weight.data_mut();
            w.copy_from_slice(&rest[..w.len()]);
            rest = &rest[w.len()..];
            if let Some(b) = &mut l.bias {
                let k = b.len();
                b.copy_from_slice(&rest[..k]);
                rest = &rest[k..];
            }
        }
    }

    fn check_inputs(&self, inputs: &Inputs) -> Result<()> {
        let n = inputs.n_rows();
        if let Some(adj) = inputs.adj {
            if adj.n_nodes() != n {
                return Err(Error::shape(format!(
                    "{n} input rows for a {}-node graph",
                    adj.n_nodes()
                )));
            }
        }
        let topo_width =
            self.trunk[0].input_width() - self.branch.last().map_or(0, Layer::output_width);
        if inputs.features.cols() != topo_width {
            return Err(Error::shape(format!(
                "model expects {topo_width} input columns, got {}",
                inputs.features.cols()
            )));
        }
        match (self.branch.first(), inputs.external) {
            (None, None) => Ok(()),
            (Some(l), Some(e)) if e.cols() == l.input_width() && e.rows() == n => Ok(()),
            (Some(l), Some(e)) => Err(Error::shape(format!(
                "model expects {n}x{} external features, got {}x{}",
                l.input_width(),
                e.rows(),
                e.cols()
            ))),
            (Some(_), None) => Err(Error::invalid("model needs external features")),
            (None, Some(_)) => Err(Error::invalid("model takes no external features")),
        }
    }

    /// CSR form of the input read by the first layer, when it is sparse
    /// enough to be worth it.
    pub(crate) fn sparse_input(&self, inputs: &Inputs) -> Option<CsrMatrix> {
        let x = match inputs.external {
            Some(external) if !self.branch.is_empty() => external,
            _ => inputs.features,
        };
        let nnz = x.data().iter().filter(|v| **v != 0.0).count();
        ((nnz as f64) <= SPARSE_INPUT_DENSITY * x.data().len() as f64)
            .then(|| CsrMatrix::from_dense(x))
    }

    fn forward(
        &self,
        inputs: &Inputs,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(DenseMatrix, Vec<Cache>)> {
        self.forward_with(inputs, self.sparse_input(inputs).as_ref(), rng)
    }

    fn forward_with(
        &self,
        inputs: &Inputs,
        sparse: Option<&CsrMatrix>,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(DenseMatrix, Vec<Cache>)> {
        self.check_inputs(inputs)?;
        let mut caches = Vec::with_capacity(self.branch.len() + self.trunk.len());
        let mut x = match inputs.external {
            Some(external) => {
                let mut h = Cow::Borrowed(external);
                for (k, l) in self.branch.iter().enumerate() {
                    let (out, cache) = l.forward(
                        &h,
                        sparse.filter(|_| k == 0),
                        inputs.adj,
                        rng.as_deref_mut(),
                    )?;
                    caches.push(cache);
                    h = Cow::Owned(out);
                }
                Cow::Owned(h.hconcat(inputs.features)?)
            }
            None => Cow::Borrowed(inputs.features),
        };
        for (k, l) in self.trunk.iter().enumerate() {
            let raw = k == 0 && self.branch.is_empty();
            let (out, cache) =
                l.forward(&x, sparse.filter(|_| raw), inputs.adj, rng.as_deref_mut())?;
            caches.push(cache);
            x = Cow::Owned(out);
        }
        let x = x.into_owned();
        Ok((x, caches))
    }

    /// Output scores before the softmax; no dropout.
    pub fn logits(&self, inputs: &Inputs) -> Result<DenseMatrix> {
        Ok(self.forward(inputs, None)?.0)
    }

    /// Class posteriors; each row sums to 1.
    pub fn predict(&self, inputs: &Inputs) -> Result<DenseMatrix> {
        Ok(softmax(&self.logits(inputs)?))
    }

    /// Mean cross-entropy over `rows` plus `l2/2 · Σ w²` over all weight
    /// matrices, and its gradient in [`parameters`](Self::parameters) order.
    /// Dropout is active when `rng` is given.
    pub fn loss_and_gradient(
        &self,
        inputs: &Inputs,
        labels: &[usize],
        rows: &[usize],
        l2: f64,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, Vec<f64>)> {
        self.loss_and_gradient_with(
            inputs,
            self.sparse_input(inputs).as_ref(),
            labels,
            rows,
            l2,
            rng,
        )
    }

    /// [`loss_and_gradient`](Self::loss_and_gradient) with the result of
    /// [`sparse_input`](Self::sparse_input) computed once by the caller.
    pub(crate) fn loss_and_gradient_with(
        &self,
        inputs: &Inputs,
        sparse: Option<&CsrMatrix>,
        labels: &[usize],
        rows: &[usize],
        l2: f64,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, Vec<f64>)> {
        if rows.is_empty() {
            return Err(Error::invalid("no training rows"));
        }
        if labels.len() != inputs.n_rows() {
            return Err(Error::shape(format!(
                "{} labels for {} rows",
                labels.len(),
                inputs.n_rows()
            )));
        }
        let (logits, caches) = self.forward_with(inputs, sparse, rng)?;
        let (mut loss, d_logits) = cross_entropy(&logits, labels, rows)?;
        loss += 0.5 * l2 * self.layers().map(|l| l.weight.sum_squares()).sum::<f64>();

        let mut grads: Vec<(DenseMatrix, Option<Vec<f64>>)> = Vec::with_capacity(caches.len());
        let nb = self.branch.len();
        let mut d = d_logits;
        for (k, l) in self.trunk.iter().enumerate().rev() {
            let need_input = k > 0 || nb > 0;
            let (dw, db, dx) = l.backward(&caches[nb + k], d, inputs.adj, need_input)?;
            grads.push((dw, db));
            d = dx.unwrap_or_else(|| DenseMatrix::zeros(0, 0));
        }
        if nb > 0 {
            let mut d = d.hsplit(self.branch[nb - 1].output_width()).0;
            for (k, l) in self.branch.iter().enumerate().rev() {
                let (dw, db, dx) = l.backward(&caches[k], d, inputs.adj, k > 0)?;
                grads.push((dw, db));
                d = dx.unwrap_or_else(|| DenseMatrix::zeros(0, 0));
            }
        }
        grads.reverse();

        let mut flat = Vec::with_capacity(self.n_parameters());
        for (l, (mut dw, db)) in self.layers().zip(grads) {
            if l2 > 0.0 {
                dw.data_mut()
                    .iter_mut()
                    .zip(l.weight.data())
                    .for_each(|(g, w)| *g += l2 * w);
            }
            flat.extend_from_slice(dw.data());
            if let Some(db) = db {
                flat.extend_from_slice(&db);
            }
        }
        Ok((loss, flat))
    }
}

/// Row-wise softmax, shifted by the row maximum for stability.
pub fn softmax(logits: &DenseMatrix) -> DenseMatrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.iter_mut().for_each(|x| *x = (*x - m).exp());
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    out
}

/// Mean softmax cross-entropy over `rows` and its gradient w.r.t. the logits.
fn cross_entropy(
    logits: &DenseMatrix,
    labels: &[usize],
    rows: &[usize],
) -> Result<(f64, DenseMatrix)> {
    let c = logits.cols();
    let scale = 1.0 / rows.len() as f64;
    let mut grad = DenseMatrix::zeros(logits.rows(), c);
    let mut loss = 0.0;
    for &i in rows {
        let y = labels[i];
        if y >= c {
            return Err(Error::invalid(format!(
                "label {y} out of range for {c} classes"
            )));
        }
        let row = logits.row(i);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        loss += log_z - row[y];
        let g = grad.row_mut(i);
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = scale * ((row[j] - log_z).exp() - if j == y { 1.0 } else { 0.0 });
        }
    }
    Ok((loss * scale, grad))
}
