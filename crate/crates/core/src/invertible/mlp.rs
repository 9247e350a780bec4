use rand::Rng;

use crate::numcore::Arith;

/// Layout of a fully connected ReLU network inside a flat parameter array.
///
/// Parameters are stored layer by layer: the `out x in` weight matrix in
/// row-major order followed by the `out` biases. Hidden layers use ReLU,
/// the last layer is linear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    sizes: Vec<usize>,
    offset: usize,
}

impl Mlp {
    /// `sizes` lists the width of every layer including input and output.
    pub fn new(sizes: Vec<usize>, offset: usize) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output widths");
        Self { sizes, offset }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// He-uniform weights, zero biases. With `zero_last` the output layer
    /// starts at zero so the network initially outputs zeros.
    pub fn init<R: Rng>(&self, params: &mut [f64], rng: &mut R, zero_last: bool) {
        let mut at = self.offset;
        let layers = self.sizes.len() - 1;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            for p in &mut params[at..at + fan_in * fan_out] {
                *p = if zero_last && l + 1 == layers {
                    0.0
                } else {
                    rng.random_range(-bound..bound)
                };
            }
            at += fan_in * fan_out;
            params[at..at + fan_out].iter_mut().for_each(|b| *b = 0.0);
            at += fan_out;
        }
    }

    /// Random weights of a given scale everywhere, for ground-truth maps.
    pub fn init_scaled<R: Rng>(&self, params: &mut [f64], rng: &mut R, scale: f64) {
        let mut at = self.offset;
        for w in self.sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = scale * (3.0 / fan_in as f64).sqrt();
            for p in &mut params[at..at + fan_in * fan_out + fan_out] {
                *p = rng.random_range(-bound..bound);
            }
            at += fan_in * fan_out + fan_out;
        }
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, input: &[A::V]) -> Vec<A::V> {
        debug_assert_eq!(input.len(), self.input_dim());
        let mut at = self.offset;
        let mut act: Vec<A::V> = input.to_vec();
        let layers = self.sizes.len() - 1;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bias_at = at + fan_in * fan_out;
            let mut next = Vec::with_capacity(fan_out);
            let mut row = Vec::with_capacity(fan_in);
            for o in 0..fan_out {
                row.clear();
                for i in 0..fan_in {
                    row.push(ops.param(at + o * fan_in + i));
                }
                let b = ops.param(bias_at + o);
                let z = ops.affine(&row, &act, b);
                next.push(if l + 1 < layers { ops.relu(z) } else { z });
            }
            at = bias_at + fan_out;
            act = next;
        }
        act
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Vec<f64> {
        let mut ops = crate::numcore::Eval::new(params);
        self.forward_with(&mut ops, input)
    }
}
