use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Fraction of `test` nodes whose highest posterior is their label.
pub fn accuracy(posteriors: &DenseMatrix, labels: &[usize], test: &[usize]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    if posteriors.rows() != labels.len() {
        return Err(Error::shape(format!(
            "{} posterior rows for {} labels",
            posteriors.rows(),
            labels.len()
        )));
    }
    let pred = posteriors.argmax_rows();
    let hits = test.iter().filter(|&&i| pred[i] == labels[i]).count();
    Ok(hits as f64 / test.len() as f64)
}

/// Accuracies of one model over several splits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub train_fraction: f64,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); 0 for a single split.
    pub std: f64,
}

impl EvalReport {
    pub fn new(
        model: impl Into<String>,
        train_fraction: f64,
        seeds: Vec<u64>,
        accuracies: Vec<f64>,
    ) -> Result<Self> {
        if accuracies.is_empty() {
            return Err(Error::invalid("need at least one split"));
        }
        if seeds.len() != accuracies.len() {
            return Err(Error::shape(format!(
                "{} seeds for {} accuracies",
                seeds.len(),
                accuracies.len()
            )));
        }
        let (mean, std) = mean_std(&accuracies);
        Ok(EvalReport {
            model: model.into(),
            train_fraction,
            seeds,
            accuracies,
            mean,
            std,
        })
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Scores each split with `run` and aggregates the accuracies.
pub fn evaluate<F>(
    model: &str,
    train_fraction: f64,
    seeds: &[u64],
    mut run: F,
) -> Result<EvalReport>
where
    F: FnMut(usize) -> Result<f64>,
{
    let accuracies = (0..seeds.len()).map(&mut run).collect::<Result<Vec<_>>>()?;
    EvalReport::new(model, train_fraction, seeds.to_vec(), accuracies)
}
