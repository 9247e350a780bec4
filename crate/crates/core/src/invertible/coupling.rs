use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::invertible::mlp::Mlp;
use crate::numcore::{Arith, Eval, ParamStore, Vector};

pub const DEFAULT_CLAMP: f64 = 5.0;

/// One permutation + affine coupling step.
///
/// With `u = x[perm]`, the layer keeps `u[..split]` and maps the rest to
/// `u[split..] * exp(clamp(scale(u[..split]))) + shift(u[..split])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLayer {
    pub perm: Vec<usize>,
    pub split: usize,
    pub scale_net: Mlp,
    pub shift_net: Mlp,
}

/// Stack of coupling layers with frozen random permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFlow {
    dim: usize,
    clamp: f64,
    layers: Vec<CouplingLayer>,
    params: ParamStore,
}

impl CouplingFlow {
    /// Layer structure with zero parameters; `perms` gives one permutation
    /// per layer and the subnets have two hidden layers of width `hidden`.
    pub fn with_permutations(dim: usize, hidden: usize, perms: Vec<Vec<usize>>, clamp: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "coupling flows need dimension >= 2, got {dim}"
            )));
        }
        if hidden == 0 || !(clamp > 0.0) {
            return Err(Error::InvalidArgument("hidden width and clamp must be positive".into()));
        }
        let split = dim / 2;
        let mut offset = 0;
        let mut layers = Vec::with_capacity(perms.len());
        for perm in perms {
            let mut seen = vec![false; dim];
            if perm.len() != dim || perm.iter().any(|&p| p >= dim || std::mem::replace(&mut seen[p], true)) {
                return Err(Error::InvalidArgument(format!("invalid permutation {perm:?}")));
            }
            let sizes = vec![split, hidden, hidden, dim - split];
            let scale_net = Mlp::new(sizes.clone(), offset);
            offset += scale_net.num_params();
            let shift_net = Mlp::new(sizes, offset);
            offset += shift_net.num_params();
            layers.push(CouplingLayer {
                perm,
                split,
                scale_net,
                shift_net,
            });
        }
        Ok(Self {
            dim,
            clamp,
            layers,
            params: ParamStore::from_values(vec![0.0; offset]),
        })
    }

    /// Exact identity: identity permutations and zero subnets.
    pub fn identity(dim: usize, layers: usize, hidden: usize) -> Result<Self> {
        Self::with_permutations(dim, hidden, vec![(0..dim).collect(); layers], DEFAULT_CLAMP)
    }

    /// Trainable flow: random permutations, He-initialised subnets whose
    /// output layers start at zero, so the flow starts as a permutation.
    pub fn new<R: Rng>(dim: usize, layers: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        let perms = random_perms(dim, layers, rng);
        let mut flow = Self::with_permutations(dim, hidden, perms, DEFAULT_CLAMP)?;
        let values = flow.params.values_mut();
        for layer in &flow.layers {
            layer.scale_net.init(values, rng, true);
            layer.shift_net.init(values, rng, true);
        }
        Ok(flow)
    }

    /// Flow with every subnet weight drawn at the given scale, for use as
    /// a fixed nonlinear ground-truth map.
    pub fn random<R: Rng>(dim: usize, layers: usize, hidden: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let perms = random_perms(dim, layers, rng);
        let mut flow = Self::with_permutations(dim, hidden, perms, DEFAULT_CLAMP)?;
        let values = flow.params.values_mut();
        for layer in &flow.layers {
            layer.scale_net.init_scaled(values, rng, scale);
            layer.shift_net.init_scaled(values, rng, scale);
        }
        Ok(flow)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    pub fn layers(&self) -> &[CouplingLayer] {
        &self.layers
    }

    pub fn hidden(&self) -> usize {
        self.layers.first().map_or(0, |l| l.scale_net.sizes()[1])
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    fn scale_shift<A: Arith>(&self, ops: &mut A, layer: &CouplingLayer, head: &[A::V]) -> (Vec<A::V>, Vec<A::V>) {
        let raw = layer.scale_net.forward_with(ops, head);
        let scale = raw
            .into_iter()
            .map(|a| ops.clamp(a, -self.clamp, self.clamp))
            .collect();
        let shift = layer.shift_net.forward_with(ops, head);
        (scale, shift)
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, x: &[A::V]) -> Result<Vec<A::V>> {
        self.check(x.len())?;
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let u: Vec<A::V> = layer.perm.iter().map(|&p| cur[p]).collect();
            let (head, tail) = u.split_at(layer.split);
            let (scale, shift) = self.scale_shift(ops, layer, head);
            let mut out = head.to_vec();
            for ((&t, &a), &b) in tail.iter().zip(&scale).zip(&shift) {
                let e = ops.exp(a);
                let m = ops.mul(t, e);
                out.push(ops.add(m, b));
            }
            cur = out;
        }
        Ok(cur)
    }

    pub fn inverse_with<A: Arith>(&self, ops: &mut A, y: &[A::V]) -> Result<Vec<A::V>> {
        self.check(y.len())?;
        let mut cur = y.to_vec();
        for layer in self.layers.iter().rev() {
            let (head, tail) = cur.split_at(layer.split);
            let (scale, shift) = self.scale_shift(ops, layer, head);
            let mut u = head.to_vec();
            for ((&t, &a), &b) in tail.iter().zip(&scale).zip(&shift) {
                let d = ops.sub(t, b);
                let na = ops.neg(a);
                let e = ops.exp(na);
                u.push(ops.mul(d, e));
            }
            let mut x = u.clone();
            for (i, &p) in layer.perm.iter().enumerate() {
                x[p] = u[i];
            }
            cur = x;
        }
        Ok(cur)
    }

    pub fn forward(&self, x: &Vector) -> Result<Vector> {
        let mut ops = Eval::new(self.params.values());
        Ok(Vector::from_raw(self.forward_with(&mut ops, x.as_slice())?))
    }

    pub fn inverse(&self, y: &Vector) -> Result<Vector> {
        let mut ops = Eval::new(self.params.values());
        Ok(Vector::from_raw(self.inverse_with(&mut ops, y.as_slice())?))
    }
}

fn random_perms<R: Rng>(dim: usize, layers: usize, rng: &mut R) -> Vec<Vec<usize>> {
    (0..layers)
        .map(|_| {
            let mut p: Vec<usize> = (0..dim).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}
