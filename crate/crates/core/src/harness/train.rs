use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::model::{ModelHyper, ModelKind, SetModel};
use crate::harness::task::{Example, SyntheticSplits, SyntheticTask};
use crate::harness::{stream_rng, INIT_STREAM, SHUFFLE_STREAM};
use crate::numcore::{mse_loss_with, Adam, Arith, Record, Tape, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub betas: (f64, f64),
    pub eps: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub model: ModelHyper,
}

impl TrainConfig {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self {
            epochs: 1000,
            batch_size: 32,
            lr: 1e-3,
            betas: (0.9, 0.999),
            eps: 1e-8,
            weight_decay: 0.0,
            seed,
            model: ModelHyper::default_for(kind),
        }
    }

    pub fn adam(&self) -> Adam {
        Adam {
            lr: self.lr,
            beta1: self.betas.0,
            beta2: self.betas.1,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if !(self.lr > 0.0) || !(self.eps > 0.0) || self.weight_decay < 0.0 {
            return Err(Error::InvalidArgument("lr and eps must be positive, weight_decay nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss of every epoch.
    pub loss_curve: Vec<f64>,
    pub steps: u64,
    pub wall_clock_s: f64,
}

/// Minibatch Adam on the mean squared error, shuffling every epoch.
///
/// With `epochs == 0` the model is left untouched.
pub fn train(model: &mut SetModel, data: &[Example], cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training data is empty".into()));
    }
    let start = Instant::now();
    let adam = cfg.adam();
    let mut rng = stream_rng(cfg.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut tape = Tape::new();
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut steps = 0;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let diverged = |reason: String, curve: &Vec<f64>| Error::TrainingDiverged {
                epoch,
                reason,
                curve: curve.clone(),
            };
            tape.clear();
            let step = (|| -> Result<_> {
                let mut rec = Record::new(&mut tape, model.params());
                let mut preds = Vec::with_capacity(batch.len());
                let mut targets: Vec<Vector> = Vec::with_capacity(batch.len());
                for &i in batch {
                    preds.push(model.forward_with(&mut rec, &data[i].set)?);
                    targets.push(data[i].target.clone());
                }
                let loss = mse_loss_with(&mut rec, &preds, &targets)?;
                Ok((loss, rec.value(loss)))
            })();
            let (loss, value) = step.map_err(|e| diverged(e.to_string(), &curve))?;
            if !value.is_finite() {
                return Err(diverged(format!("non-finite loss {value}"), &curve));
            }
            tape.backward(loss, model.params_mut())?;
            model
                .params_mut()
                .adam_step(&adam)
                .map_err(|e| diverged(e.to_string(), &curve))?;
            steps += 1;
            total += value * batch.len() as f64;
        }
        curve.push(total / data.len() as f64);
    }
    Ok(TrainReport {
        loss_curve: curve,
        steps,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Root mean over examples of the mean squared coordinate error.
pub fn rmse_with<F>(predict: F, data: &[Example]) -> Result<f64>
where
    F: Fn(&[Vector]) -> Result<Vector>,
{
    if data.is_empty() {
        return Err(Error::InvalidArgument("evaluation data is empty".into()));
    }
    let mut total = 0.0;
    for ex in data {
        let pred = predict(&ex.set)?;
        if pred.dim() != ex.target.dim() {
            return Err(Error::ShapeMismatch {
                expected: ex.target.dim(),
                got: pred.dim(),
            });
        }
        let se: f64 = pred
            .iter()
            .zip(ex.target.iter())
            .map(|(p, t)| (p - t) * (p - t))
            .sum();
        total += se / pred.dim() as f64;
    }
    Ok((total / data.len() as f64).sqrt())
}

pub fn evaluate(model: &SetModel, data: &[Example]) -> Result<f64> {
    rmse_with(|set| model.predict(set), data)
}

/// Largest absolute prediction error over a dataset.
pub fn max_abs_error(model: &SetModel, data: &[Example]) -> Result<f64> {
    let mut worst = 0.0f64;
    for ex in data {
        worst = worst.max(model.predict(&ex.set)?.max_abs_diff(&ex.target)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub task: SyntheticTask,
    pub model: ModelKind,
    pub seed: u64,
    pub rmse_validation: f64,
    pub rmse_small: f64,
    pub rmse_large: f64,
    pub loss_curve: Vec<f64>,
    pub wall_clock_s: f64,
    pub config: TrainConfig,
}

/// Builds a model from `cfg`, trains it on the training split and
/// evaluates every held-out split.
pub fn run_experiment(splits: &SyntheticSplits, kind: ModelKind, cfg: &TrainConfig) -> Result<(SetModel, ExperimentResult)> {
    let mut init_rng = stream_rng(cfg.seed, INIT_STREAM);
    let mut model = SetModel::build(kind, cfg.model, &mut init_rng)?;
    let start = Instant::now();
    let report = train(&mut model, &splits.train, cfg)?;
    let result = ExperimentResult {
        task: splits.task,
        model: kind,
        seed: cfg.seed,
        rmse_validation: evaluate(&model, &splits.validation)?,
        rmse_small: evaluate(&model, &splits.small_test)?,
        rmse_large: evaluate(&model, &splits.large_test)?,
        loss_curve: report.loss_curve,
        wall_clock_s: start.elapsed().as_secs_f64(),
        config: *cfg,
    };
    Ok((model, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::task::SplitSizes;

    fn small_splits(task: SyntheticTask) -> SyntheticSplits {
        let sizes = SplitSizes {
            train: 40,
            validation: 10,
            small_test: 10,
            large_test: 10,
        };
        SyntheticSplits::generate(task, sizes, 3).unwrap()
    }

    #[test]
    fn zero_epochs_leave_parameters() {
        let splits = small_splits(SyntheticTask::Add);
        let mut rng = stream_rng(1, INIT_STREAM);
        let mut model = SetModel::build(ModelKind::Agn, ModelHyper::default_for(ModelKind::Agn), &mut rng).unwrap();
        let before = model.clone();
        let mut cfg = TrainConfig::new(ModelKind::Agn, 1);
        cfg.epochs = 0;
        let report = train(&mut model, &splits.train, &cfg).unwrap();
        assert!(report.loss_curve.is_empty());
        assert_eq!(model, before);
    }

    #[test]
    fn evaluate_examples() {
        let splits = small_splits(SyntheticTask::Mul);
        let exact = rmse_with(|s| splits.task.fold(s), &splits.train).unwrap();
        assert!(exact < 1e-12);
        let twos: Vec<Example> = splits
            .train
            .iter()
            .map(|e| Example {
                set: e.set.clone(),
                target: Vector::scalar(2.0),
            })
            .collect();
        let zero = rmse_with(|_| Ok(Vector::scalar(0.0)), &twos).unwrap();
        assert!((zero - 2.0).abs() < 1e-15);
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let splits = small_splits(SyntheticTask::Add1);
        let mut cfg = TrainConfig::new(ModelKind::Agn, 5);
        cfg.epochs = 30;
        cfg.lr = 1e-2;
        let (m1, r1) = run_experiment(&splits, ModelKind::Agn, &cfg).unwrap();
        let (m2, r2) = run_experiment(&splits, ModelKind::Agn, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1.loss_curve, r2.loss_curve);
        assert!(r1.loss_curve.last().unwrap() < &r1.loss_curve[0]);
    }

    #[test]
    fn mismatched_hyperparameters_rejected() {
        let splits = small_splits(SyntheticTask::Add);
        let cfg = TrainConfig::new(ModelKind::DeepSets, 1);
        assert!(run_experiment(&splits, ModelKind::Agn, &cfg).is_err());
    }

    #[test]
    fn bad_config_rejected() {
        let splits = small_splits(SyntheticTask::Add);
        let mut cfg = TrainConfig::new(ModelKind::Agn, 1);
        cfg.batch_size = 0;
        assert!(run_experiment(&splits, ModelKind::Agn, &cfg).is_err());
    }
}
