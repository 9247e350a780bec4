use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analogy::embeddings::EmbeddingTable;
use crate::analogy::relations::AnalogyExample;
use crate::error::{Error, Result};
use crate::harness::{stream_rng, INIT_STREAM, SHUFFLE_STREAM};
use crate::invertible::{CouplingFlow, Mlp};
use crate::numcore::{neg_cosine_loss_with, Adam, Arith, Eval, ParamStore, Record, Tape, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalogyKind {
    /// `b - a + c`
    Wv,
    /// `MLP(b - a + c)`
    WvMlp,
    /// `phi^-1(phi(b) - phi(a) + phi(c))`
    WvAgn,
}

impl AnalogyKind {
    pub const ALL: [AnalogyKind; 3] = [AnalogyKind::Wv, AnalogyKind::WvMlp, AnalogyKind::WvAgn];

    pub fn name(self) -> &'static str {
        match self {
            AnalogyKind::Wv => "wv",
            AnalogyKind::WvMlp => "wv_mlp",
            AnalogyKind::WvAgn => "wv_agn",
        }
    }
}

impl fmt::Display for AnalogyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnalogyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AnalogyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown analogy kind {s:?}; valid kinds: wv, wv_mlp, wv_agn")))
    }
}

/// ReLU network `R^d -> R^d` with `layers` linear layers.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyMlp {
    net: Mlp,
    params: ParamStore,
}

impl AnalogyMlp {
    pub fn zeroed(dim: usize, layers: usize, hidden: usize) -> Result<Self> {
        if dim == 0 || layers == 0 || hidden == 0 {
            return Err(Error::InvalidArgument("MLP dimensions must be positive".into()));
        }
        let mut sizes = vec![dim];
        sizes.extend(std::iter::repeat_n(hidden, layers - 1));
        sizes.push(dim);
        let net = Mlp::new(sizes, 0);
        let params = ParamStore::from_values(vec![0.0; net.num_params()]);
        Ok(Self { net, params })
    }

    pub fn new<R: Rng>(dim: usize, layers: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeroed(dim, layers, hidden)?;
        m.net.init(m.params.values_mut(), rng, false);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.net.input_dim()
    }

    pub fn layers(&self) -> usize {
        self.net.sizes().len() - 1
    }

    pub fn hidden(&self) -> usize {
        if self.layers() > 1 {
            self.net.sizes()[1]
        } else {
            0
        }
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, x: &[A::V]) -> Vec<A::V> {
        self.net.forward_with(ops, x)
    }
}

/// A trained (or parameter-free) analogy function.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalogyModel {
    Wv { dim: usize },
    Mlp(AnalogyMlp),
    Agn(CouplingFlow),
}

/// Training hyperparameters; `layers`/`hidden` describe the MLP or the
/// coupling stack, and are ignored for plain arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogyConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub betas: (f64, f64),
    pub eps: f64,
    pub weight_decay: f64,
    pub layers: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl AnalogyConfig {
    /// Per-kind layer count and weight decay for 300-dimensional word vectors,
    /// hidden width reduced to 32.
    pub fn default_for(kind: AnalogyKind, seed: u64) -> Self {
        let (layers, weight_decay) = match kind {
            AnalogyKind::Wv => (0, 0.0),
            AnalogyKind::WvMlp => (4, 6.43e-4),
            AnalogyKind::WvAgn => (5, 1.60e-4),
        };
        Self {
            epochs: 100,
            batch_size: 32,
            lr: 1e-3,
            betas: (0.9, 0.999),
            eps: 1e-8,
            weight_decay,
            layers,
            hidden: 32,
            seed,
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
}

impl AnalogyModel {
    /// Fresh model. The coupling stack starts as a fixed permutation, so an
    /// untrained AGN computes `b - a + c`.
    pub fn build<R: Rng>(kind: AnalogyKind, dim: usize, cfg: &AnalogyConfig, rng: &mut R) -> Result<Self> {
        Ok(match kind {
            AnalogyKind::Wv => AnalogyModel::Wv { dim },
            AnalogyKind::WvMlp => AnalogyModel::Mlp(AnalogyMlp::new(dim, cfg.layers, cfg.hidden, rng)?),
            AnalogyKind::WvAgn => AnalogyModel::Agn(CouplingFlow::new(dim, cfg.layers, cfg.hidden, rng)?),
        })
    }

    pub fn kind(&self) -> AnalogyKind {
        match self {
            AnalogyModel::Wv { .. } => AnalogyKind::Wv,
            AnalogyModel::Mlp(_) => AnalogyKind::WvMlp,
            AnalogyModel::Agn(_) => AnalogyKind::WvAgn,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnalogyModel::Wv { dim } => *dim,
            AnalogyModel::Mlp(m) => m.dim(),
            AnalogyModel::Agn(f) => f.dim(),
        }
    }

    pub fn params(&self) -> Option<&ParamStore> {
        match self {
            AnalogyModel::Wv { .. } => None,
            AnalogyModel::Mlp(m) => Some(m.params()),
            AnalogyModel::Agn(f) => Some(f.params()),
        }
    }

    pub fn params_mut(&mut self) -> Option<&mut ParamStore> {
        match self {
            AnalogyModel::Wv { .. } => None,
            AnalogyModel::Mlp(m) => Some(m.params_mut()),
            AnalogyModel::Agn(f) => Some(f.params_mut()),
        }
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, a: &Vector, b: &Vector, c: &Vector) -> Result<Vec<A::V>> {
        let d = self.dim();
        for v in [a, b, c] {
            if v.dim() != d {
                return Err(Error::ShapeMismatch { expected: d, got: v.dim() });
            }
        }
        let consts = |ops: &mut A, v: &Vector| -> Vec<A::V> { v.iter().map(|&x| ops.constant(x)).collect() };
        let arithmetic = || -> Vec<f64> { (0..d).map(|i| b[i] - a[i] + c[i]).collect() };
        match self {
            AnalogyModel::Wv { .. } => Ok(arithmetic().into_iter().map(|x| ops.constant(x)).collect()),
            AnalogyModel::Mlp(m) => {
                let x: Vec<A::V> = arithmetic().into_iter().map(|x| ops.constant(x)).collect();
                Ok(m.forward_with(ops, &x))
            }
            AnalogyModel::Agn(flow) => {
                let (ca, cb, cc) = (consts(ops, a), consts(ops, b), consts(ops, c));
                let pa = flow.forward_with(ops, &ca)?;
                let pb = flow.forward_with(ops, &cb)?;
                let pc = flow.forward_with(ops, &cc)?;
                let z: Vec<A::V> = (0..d)
                    .map(|i| {
                        let t = ops.sub(pb[i], pa[i]);
                        ops.add(t, pc[i])
                    })
                    .collect();
                flow.inverse_with(ops, &z)
            }
        }
    }

    pub fn apply(&self, a: &Vector, b: &Vector, c: &Vector) -> Result<Vector> {
        let empty = [];
        let values = self.params().map_or(&empty[..], |p| p.values());
        let mut ops = Eval::new(values);
        let out = self.forward_with(&mut ops, a, b, c)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("analogy output"));
        }
        Ok(Vector::from_raw(out))
    }
}

/// Evaluates `kind` on `(a, b, c)`; trained kinds need a matching model.
pub fn analogy_fn(kind: AnalogyKind, a: &Vector, b: &Vector, c: &Vector, model: Option<&AnalogyModel>) -> Result<Vector> {
    match (kind, model) {
        (AnalogyKind::Wv, None) => AnalogyModel::Wv { dim: a.dim() }.apply(a, b, c),
        (k, Some(m)) if m.kind() == k => m.apply(a, b, c),
        (k, Some(m)) => Err(Error::InvalidArgument(format!("{k} requested but model is {}", m.kind()))),
        (k, None) => Err(Error::InvalidArgument(format!("{k} needs a trained model"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogyTrainReport {
    /// Mean negative cosine of every epoch.
    pub loss_curve: Vec<f64>,
    pub steps: u64,
    pub wall_clock_s: f64,
}

/// Builds a model from `cfg` and trains it; see [`train_analogy_model`].
pub fn train_analogy(
    kind: AnalogyKind,
    table: &EmbeddingTable,
    train: &[AnalogyExample],
    cfg: &AnalogyConfig,
) -> Result<(AnalogyModel, AnalogyTrainReport)> {
    let mut rng = stream_rng(cfg.seed, INIT_STREAM);
    let mut model = AnalogyModel::build(kind, table.dim(), cfg, &mut rng)?;
    let report = train_analogy_model(&mut model, table, train, cfg)?;
    Ok((model, report))
}

/// Adam on the mean negative cosine between `f(a, b, c)` and the first
/// answer candidate. Plain arithmetic has nothing to train and returns an
/// empty curve.
pub fn train_analogy_model(
    model: &mut AnalogyModel,
    table: &EmbeddingTable,
    train: &[AnalogyExample],
    cfg: &AnalogyConfig,
) -> Result<AnalogyTrainReport> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("analogy training set is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
    }
    let resolved = train
        .iter()
        .map(|e| e.resolve(table))
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    if model.params().is_none() {
        return Ok(AnalogyTrainReport {
            loss_curve: Vec::new(),
            steps: 0,
            wall_clock_s: 0.0,
        });
    }
    let adam = cfg.adam();
    let mut rng = stream_rng(cfg.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..resolved.len()).collect();
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
            let step = {
                let store = model.params().expect("trainable model");
                let mut rec = Record::new(&mut tape, store);
                (|| -> Result<_> {
                    let mut preds = Vec::with_capacity(batch.len());
                    let mut targets = Vec::with_capacity(batch.len());
                    for &i in batch {
                        let ex = &resolved[i];
                        preds.push(model.forward_with(&mut rec, table.row(ex.a), table.row(ex.b), table.row(ex.c))?);
                        targets.push(table.row(ex.d[0]).clone());
                    }
                    let loss = neg_cosine_loss_with(&mut rec, &preds, &targets)?;
                    Ok((loss, rec.value(loss)))
                })()
            };
            let (loss, value) = step.map_err(|e| diverged(e.to_string(), &curve))?;
            if !value.is_finite() {
                return Err(diverged(format!("non-finite loss {value}"), &curve));
            }
            let store = model.params_mut().expect("trainable model");
            tape.backward(loss, store)?;
            store.adam_step(&adam).map_err(|e| diverged(e.to_string(), &curve))?;
            steps += 1;
            total += value * batch.len() as f64;
        }
        curve.push(total / resolved.len() as f64);
    }
    Ok(AnalogyTrainReport {
        loss_curve: curve,
        steps,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}
