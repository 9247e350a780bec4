//! DeepSets baseline: `outer(sum_x inner(x))`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::invertible::Mlp;
use crate::numcore::{Arith, Eval, ParamStore, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct DeepSetsModel {
    dim: usize,
    layers: usize,
    hidden: usize,
    middle: usize,
    inner: Mlp,
    outer: Mlp,
    params: ParamStore,
}

fn widths(input: usize, hidden: usize, output: usize, layers: usize) -> Vec<usize> {
    let mut sizes = vec![input];
    sizes.extend(std::iter::repeat_n(hidden, layers - 1));
    sizes.push(output);
    sizes
}

impl DeepSetsModel {
    /// Zero-parameter model; `layers` counts the linear layers of each MLP.
    pub fn zeroed(dim: usize, layers: usize, hidden: usize, middle: usize) -> Result<Self> {
        if dim == 0 || layers == 0 || hidden == 0 || middle == 0 {
            return Err(Error::InvalidArgument(
                "DeepSets dimensions and layer count must be positive".into(),
            ));
        }
        let inner = Mlp::new(widths(dim, hidden, middle, layers), 0);
        let outer = Mlp::new(widths(middle, hidden, dim, layers), inner.num_params());
        let n = inner.num_params() + outer.num_params();
        Ok(Self {
            dim,
            layers,
            hidden,
            middle,
            inner,
            outer,
            params: ParamStore::from_values(vec![0.0; n]),
        })
    }

    /// He-uniform initialisation of both networks.
    pub fn new<R: Rng>(dim: usize, layers: usize, hidden: usize, middle: usize, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeroed(dim, layers, hidden, middle)?;
        let values = model.params.values_mut();
        model.inner.init(values, rng, false);
        model.outer.init(values, rng, false);
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn middle(&self) -> usize {
        self.middle
    }

    pub fn inner(&self) -> &Mlp {
        &self.inner
    }

    pub fn outer(&self) -> &Mlp {
        &self.outer
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Elements are pooled in sorted order, which makes the output
    /// bitwise invariant under permutations of the input.
    pub fn forward_with<A: Arith>(&self, ops: &mut A, set: &[Vector]) -> Result<Vec<A::V>> {
        if set.is_empty() {
            return Err(Error::EmptyMultiset);
        }
        if let Some(bad) = set.iter().find(|x| x.dim() != self.dim) {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                got: bad.dim(),
            });
        }
        let mut order: Vec<&Vector> = set.iter().collect();
        order.sort_by(|a, b| a.total_cmp(b));
        let mut pooled: Vec<Vec<A::V>> = vec![Vec::with_capacity(order.len()); self.middle];
        for x in order {
            let xs: Vec<A::V> = x.iter().map(|&v| ops.constant(v)).collect();
            for (slot, h) in pooled.iter_mut().zip(self.inner.forward_with(ops, &xs)) {
                slot.push(h);
            }
        }
        let pooled: Vec<A::V> = pooled.iter().map(|terms| ops.sum(terms)).collect();
        Ok(self.outer.forward_with(ops, &pooled))
    }

    pub fn forward(&self, set: &[Vector]) -> Result<Vector> {
        let mut ops = Eval::new(self.params.values());
        Vector::new(self.forward_with(&mut ops, set)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(x: f64) -> Vector {
        Vector::scalar(x)
    }

    #[test]
    fn identity_networks_sum() {
        let mut m = DeepSetsModel::zeroed(1, 1, 4, 1).unwrap();
        // inner: w=1, b=0; outer: w=1, b=0
        m.params_mut().values_mut().copy_from_slice(&[1.0, 0.0, 1.0, 0.0]);
        let out = m.forward(&[s(1.0), s(2.0), s(3.0)]).unwrap();
        assert_eq!(out[0], 6.0);
    }

    #[test]
    fn permutation_invariance_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DeepSetsModel::new(2, 3, 8, 5, &mut rng).unwrap();
        let mut set: Vec<Vector> = (0..4)
            .map(|i| Vector::new(vec![0.3 * i as f64 - 1.0, 1.7 - 0.9 * i as f64]).unwrap())
            .collect();
        let reference = m.forward(&set).unwrap();
        for _ in 0..10 {
            set.shuffle(&mut rng);
            assert_eq!(m.forward(&set).unwrap(), reference);
        }
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = DeepSetsModel::new(1, 2, 4, 4, &mut rng).unwrap();
        assert!(matches!(m.forward(&[]), Err(Error::EmptyMultiset)));
        assert!(m.forward(&[Vector::new(vec![1.0, 2.0]).unwrap()]).is_err());
        assert!(DeepSetsModel::zeroed(1, 0, 4, 4).is_err());
    }

    #[test]
    fn parameter_layout() {
        let m = DeepSetsModel::zeroed(1, 3, 8, 4).unwrap();
        assert_eq!(m.inner().sizes(), &[1, 8, 8, 4]);
        assert_eq!(m.outer().sizes(), &[4, 8, 8, 1]);
        assert_eq!(m.params().len(), m.inner().num_params() + m.outer().num_params());
    }
}
