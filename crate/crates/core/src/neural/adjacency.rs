use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseMatrix;
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyMode {
    /// `D^{-1/2}(A + Aᵀ + I)D^{-1/2}`.
    Symmetric,
    /// The forward and backward operators, each normalized on its own.
    Asymmetric,
}

/// Propagation operator of a graph convolution.
///
/// In asymmetric mode it stands for the `2n × n` stack `[fwd; bwd]`; the
/// transposes are kept so the backward pass needs no extra work.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    mode: AdjacencyMode,
    fwd: CsrMatrix,
    fwd_t: CsrMatrix,
    bwd: Option<(CsrMatrix, CsrMatrix)>,
}

/// `D^{-1/2} M D^{-1/2}` with `D` the row sums of `M`.
fn sym_normalize(m: &CsrMatrix) -> CsrMatrix {
    let d: Vec<f64> = m
        .row_sums()
        .into_iter()
        .map(|s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 })
        .collect();
    m.scale_rows_cols(&d, &d)
}

pub fn normalize_adjacency(g: &DirectedGraph, mode: AdjacencyMode) -> NormalizedAdjacency {
    let n = g.n_nodes();
    let a = CsrMatrix::adjacency(g);
    let at = a.transpose();
    let eye = CsrMatrix::identity(n);
    match mode {
        AdjacencyMode::Symmetric => {
            let s = sym_normalize(&a.add(&at).add(&eye));
            NormalizedAdjacency {
                mode,
                fwd_t: s.clone(),
                fwd: s,
                bwd: None,
            }
        }
        AdjacencyMode::Asymmetric => {
            let fwd = sym_normalize(&a.add(&eye));
            let bwd = sym_normalize(&at.add(&eye));
            let bwd_t = bwd.transpose();
            NormalizedAdjacency {
                mode,
                fwd_t: fwd.transpose(),
                fwd,
                bwd: Some((bwd, bwd_t)),
            }
        }
    }
}

impl NormalizedAdjacency {
    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn n_nodes(&self) -> usize {
        self.fwd.n_rows()
    }

    /// The symmetric operator, or the forward half in asymmetric mode.
    pub fn fwd(&self) -> &CsrMatrix {
        &self.fwd
    }

    /// The backward half (asymmetric mode only).
    pub fn bwd(&self) -> Option<&CsrMatrix> {
        self.bwd.as_ref().map(|(b, _)| b)
    }

    pub(crate) fn fwd_t(&self) -> &CsrMatrix {
        &self.fwd_t
    }

    pub(crate) fn bwd_t(&self) -> Option<&CsrMatrix> {
        self.bwd.as_ref().map(|(_, t)| t)
    }

    /// Applies the operator to `x`: `n × k` in symmetric mode, the stacked
    /// `2n × k` result in asymmetric mode.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let top = self.fwd.matmul_dense(x)?;
        match self.bwd() {
            None => Ok(top),
            Some(b) => vstack(&top, &b.matmul_dense(x)?),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Identity,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
        }
    }
}

/// One graph convolution `σ(Ã · X · W)`; `n × o` in symmetric mode, `2n × o`
/// in asymmetric mode.
pub fn gcn_layer(
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    w: &DenseMatrix,
    activation: Activation,
) -> Result<DenseMatrix> {
    if x.rows() != adj.n_nodes() {
        return Err(Error::shape(format!(
            "input has {} rows, graph has {} nodes",
            x.rows(),
            adj.n_nodes()
        )));
    }
    let xw = x.matmul(w)?;
    Ok(adj.apply(&xw)?.map(|v| activation.apply(v)))
}

fn vstack(top: &DenseMatrix, bottom: &DenseMatrix) -> Result<DenseMatrix> {
    if top.cols() != bottom.cols() {
        return Err(Error::shape(format!(
            "cannot stack {} columns on {} columns",
            top.cols(),
            bottom.cols()
        )));
    }
    let mut data = top.data().to_vec();
    data.extend_from_slice(bottom.data());
    DenseMatrix::from_vec(top.rows() + bottom.rows(), top.cols(), data)
}

/// `2n × o` → `n × 2o`: row `i` becomes `(x[i, :], x[n + i, :])`.
pub fn fold_stacked(x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.rows() % 2 != 0 {
        return Err(Error::shape(format!("cannot fold {} rows", x.rows())));
    }
    let n = x.rows() / 2;
    let o = x.cols();
    let mut out = DenseMatrix::zeros(n, 2 * o);
    for i in 0..n {
        let row = out.row_mut(i);
        row[..o].copy_from_slice(x.row(i));
        row[o..].copy_from_slice(x.row(n + i));
    }
    Ok(out)
}

/// Inverse of [`fold_stacked`].
pub fn unstack(x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() % 2 != 0 {
        return Err(Error::shape(format!("cannot unstack {} columns", x.cols())));
    }
    let (left, right) = x.hsplit(x.cols() / 2);
    vstack(&left, &right)
}
