use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Dense layers on per-node features; the graph is not used.
    Ffn,
    /// Graph convolutions over the symmetrized adjacency.
    GcnSym,
    /// Graph convolutions over the stacked forward/backward pair.
    GcnAsym,
    /// External features pass through one stacked convolution, are
    /// concatenated with the topology input and then feed a `GcnAsym` stack.
    GcnCombined,
}

/// Hyperparameters of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub architecture: Architecture,
    /// Widths of the hidden layers. Stacked convolutions double the width
    /// seen by the next layer.
    pub hidden: Vec<usize>,
    /// Width of the convolution applied to the external features
    /// (`GcnCombined` only).
    pub external_hidden: usize,
    /// Dropout rate on the input of every layer.
    pub dropout: f64,
    /// Whether the first layer's input is dropped out as well.
    pub input_dropout: bool,
    /// Weight of the `λ/2 · Σ w²` penalty over every weight matrix.
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Adds a trainable bias to every layer.
    pub bias: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::gcn_sym()
    }
}

impl ModelSpec {
    /// 300 → 100 ReLU layers, 10% dropout, L2 0.2.
    pub fn ffn() -> Self {
        ModelSpec {
            architecture: Architecture::Ffn,
            hidden: vec![300, 100],
            external_hidden: 16,
            dropout: 0.1,
            input_dropout: true,
            l2: 0.2,
            learning_rate: 0.01,
            epochs: 200,
            seed: 0,
            bias: true,
        }
    }

    /// Two convolutions with 16 hidden units, 40% dropout, L2 0.001.
    pub fn gcn_sym() -> Self {
        ModelSpec {
            architecture: Architecture::GcnSym,
            hidden: vec![16],
            external_hidden: 16,
            dropout: 0.4,
            input_dropout: true,
            l2: 0.001,
            learning_rate: 0.01,
            epochs: 200,
            seed: 0,
            bias: false,
        }
    }

    pub fn gcn_asym() -> Self {
        ModelSpec {
            architecture: Architecture::GcnAsym,
            ..ModelSpec::gcn_sym()
        }
    }

    pub fn gcn_combined() -> Self {
        ModelSpec {
            architecture: Architecture::GcnCombined,
            ..ModelSpec::gcn_sym()
        }
    }

    pub fn for_architecture(architecture: Architecture) -> Self {
        match architecture {
            Architecture::Ffn => Self::ffn(),
            Architecture::GcnSym => Self::gcn_sym(),
            Architecture::GcnAsym => Self::gcn_asym(),
            Architecture::GcnCombined => Self::gcn_combined(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.hidden.iter().find(|&&w| w == 0) {
            return Err(Error::invalid(format!(
                "hidden width must be at least 1, got {w}"
            )));
        }
        if self.architecture == Architecture::GcnCombined && self.external_hidden == 0 {
            return Err(Error::invalid("external_hidden must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::invalid(format!(
                "l2 must be a finite non-negative number, got {}",
                self.l2
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for a in [
            Architecture::Ffn,
            Architecture::GcnSym,
            Architecture::GcnAsym,
            Architecture::GcnCombined,
        ] {
            ModelSpec::for_architecture(a).validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            ModelSpec {
                hidden: vec![16, 0],
                ..ModelSpec::gcn_sym()
            },
            ModelSpec {
                external_hidden: 0,
                ..ModelSpec::gcn_combined()
            },
            ModelSpec {
                dropout: 1.0,
                ..ModelSpec::gcn_sym()
            },
            ModelSpec {
                learning_rate: 0.0,
                ..ModelSpec::gcn_sym()
            },
            ModelSpec {
                epochs: 0,
                ..ModelSpec::gcn_sym()
            },
        ];
        for spec in bad {
            assert!(spec.validate().is_err(), "{spec:?}");
        }
    }
}
