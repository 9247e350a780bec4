use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::model::{ModelHyper, ModelKind};
use crate::harness::task::SyntheticSplits;
use crate::harness::train::{run_experiment, TrainConfig};
use crate::harness::{stream_rng, SEARCH_STREAM};

/// Inclusive integer ranges searched for each hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub groups: (usize, usize),
    pub units: (usize, usize),
    pub layers: (usize, usize),
    pub hidden: (usize, usize),
    pub middle: (usize, usize),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            groups: (2, 32),
            units: (2, 32),
            layers: (2, 8),
            hidden: (2, 32),
            middle: (2, 32),
        }
    }
}

pub const DEFAULT_TRIALS: usize = 16;

impl SearchSpace {
    /// Degenerate space containing exactly the given hyperparameters.
    pub fn point(hyper: ModelHyper) -> Self {
        let mut space = Self::default();
        match hyper {
            ModelHyper::Monotonic { groups, units } => {
                space.groups = (groups, groups);
                space.units = (units, units);
            }
            ModelHyper::DeepSets { layers, hidden, middle } => {
                space.layers = (layers, layers);
                space.hidden = (hidden, hidden);
                space.middle = (middle, middle);
            }
        }
        space
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("groups", self.groups),
            ("units", self.units),
            ("layers", self.layers),
            ("hidden", self.hidden),
            ("middle", self.middle),
        ] {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidArgument(format!("bad range for {name}: [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, kind: ModelKind, rng: &mut R) -> ModelHyper {
        let pick = |rng: &mut R, (lo, hi): (usize, usize)| rng.random_range(lo..=hi);
        match kind {
            ModelKind::Agn | ModelKind::Asn => ModelHyper::Monotonic {
                groups: pick(rng, self.groups),
                units: pick(rng, self.units),
            },
            ModelKind::DeepSets => ModelHyper::DeepSets {
                layers: pick(rng, self.layers),
                hidden: pick(rng, self.hidden),
                middle: pick(rng, self.middle),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub config: TrainConfig,
    /// `None` when the trial diverged.
    pub validation_rmse: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: TrainConfig,
    pub best_index: usize,
    pub trials: Vec<TrialRecord>,
}

/// Seeded random search. Trial `i` trains with seed `base.seed + i` on the
/// training split and is scored by validation RMSE; ties go to the earlier
/// trial. Trials run on the current rayon pool.
pub fn random_search(
    splits: &SyntheticSplits,
    kind: ModelKind,
    space: &SearchSpace,
    trials: usize,
    base: &TrainConfig,
) -> Result<SearchOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    space.validate()?;
    let mut rng = stream_rng(base.seed, SEARCH_STREAM);
    let configs: Vec<TrainConfig> = (0..trials)
        .map(|i| TrainConfig {
            seed: base.seed.wrapping_add(i as u64),
            model: space.sample(kind, &mut rng),
            ..*base
        })
        .collect();

    let records: Vec<TrialRecord> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| match run_experiment(splits, kind, &config) {
            Ok((_, result)) if result.rmse_validation.is_finite() => TrialRecord {
                index,
                config,
                validation_rmse: Some(result.rmse_validation),
                error: None,
            },
            Ok(_) => TrialRecord {
                index,
                config,
                validation_rmse: None,
                error: Some("non-finite validation RMSE".into()),
            },
            Err(e) => TrialRecord {
                index,
                config,
                validation_rmse: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let best = records
        .iter()
        .filter_map(|r| r.validation_rmse.map(|v| (r.index, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((i, v)),
        });
    match best {
        Some((best_index, _)) => Ok(SearchOutcome {
            best: records[best_index].config,
            best_index,
            trials: records,
        }),
        None => Err(Error::AllTrialsDiverged(
            records.iter().map(|r| r.config.seed).collect(),
        )),
    }
}
