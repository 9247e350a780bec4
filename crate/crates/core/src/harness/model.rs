use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::abelian::{AbelianOp, Combiner};
use crate::baseline::DeepSetsModel;
use crate::error::{Error, Result};
use crate::invertible::MonotonicNet;
use crate::numcore::{Arith, Eval, ParamStore, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Agn,
    Asn,
    DeepSets,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Agn, ModelKind::Asn, ModelKind::DeepSets];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Agn => "agn",
            ModelKind::Asn => "asn",
            ModelKind::DeepSets => "deepsets",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown model {s:?}; valid models: agn, asn, deepsets"))
            })
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelHyper {
    /// Monotonic-net embedding: `groups` groups of `units` units each.
    Monotonic { groups: usize, units: usize },
    /// DeepSets: linear layers per MLP, hidden width, pooled width.
    DeepSets { layers: usize, hidden: usize, middle: usize },
}

impl ModelHyper {
    /// Defaults for each model kind on the one-dimensional tasks.
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Agn | ModelKind::Asn => ModelHyper::Monotonic { groups: 4, units: 4 },
            ModelKind::DeepSets => ModelHyper::DeepSets {
                layers: 3,
                hidden: 16,
                middle: 16,
            },
        }
    }

    fn fits(&self, kind: ModelKind) -> bool {
        matches!(
            (kind, self),
            (ModelKind::Agn | ModelKind::Asn, ModelHyper::Monotonic { .. })
                | (ModelKind::DeepSets, ModelHyper::DeepSets { .. })
        )
    }
}

/// A multiset model trainable by the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum SetModel {
    Abelian(AbelianOp),
    DeepSets(DeepSetsModel),
}

impl SetModel {
    /// Fresh one-dimensional model with random initial parameters.
    pub fn build<R: Rng>(kind: ModelKind, hyper: ModelHyper, rng: &mut R) -> Result<Self> {
        if !hyper.fits(kind) {
            return Err(Error::InvalidArgument(format!(
                "hyperparameters {hyper:?} do not apply to model {kind}"
            )));
        }
        Ok(match hyper {
            ModelHyper::Monotonic { groups, units } => {
                if groups == 0 || units == 0 {
                    return Err(Error::InvalidArgument("groups and units must be positive".into()));
                }
                let phi = MonotonicNet::new(groups, units, rng);
                let combiner = if kind == ModelKind::Agn {
                    Combiner::Sum
                } else {
                    Combiner::ElementwiseProduct
                };
                SetModel::Abelian(AbelianOp::new(phi, combiner))
            }
            ModelHyper::DeepSets { layers, hidden, middle } => {
                SetModel::DeepSets(DeepSetsModel::new(1, layers, hidden, middle, rng)?)
            }
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            SetModel::Abelian(op) => match op.combiner() {
                Combiner::Sum => ModelKind::Agn,
                Combiner::ElementwiseProduct => ModelKind::Asn,
            },
            SetModel::DeepSets(_) => ModelKind::DeepSets,
        }
    }

    pub fn params(&self) -> &ParamStore {
        match self {
            SetModel::Abelian(op) => op.phi().params(),
            SetModel::DeepSets(m) => m.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        match self {
            SetModel::Abelian(op) => op.phi_mut().params_mut(),
            SetModel::DeepSets(m) => m.params_mut(),
        }
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, set: &[Vector]) -> Result<Vec<A::V>> {
        match self {
            SetModel::Abelian(op) => op.fold_with(ops, set),
            SetModel::DeepSets(m) => m.forward_with(ops, set),
        }
    }

    pub fn predict(&self, set: &[Vector]) -> Result<Vector> {
        match self {
            SetModel::Abelian(op) => op.fold_multiset(set),
            SetModel::DeepSets(m) => {
                let mut ops = Eval::new(m.params().values());
                Vector::new(m.forward_with(&mut ops, set)?)
            }
        }
    }
}
