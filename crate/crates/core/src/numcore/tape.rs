//! Scalar reverse-mode differentiation.
//!
//! Models are written once against the [`Arith`] trait and run either on
//! plain `f64` values ([`Eval`]) or recorded onto a [`Tape`] ([`Record`]) for
//! gradient computation. Every recorded node stores its value and the local
//! partial derivative towards each operand; [`Tape::backward`] replays the
//! nodes in reverse and accumulates adjoints.

use crate::error::{Error, Result};
use crate::numcore::params::ParamStore;

/// Index of a scalar node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Builds an id from a raw index without checking it against any tape.
    pub fn from_index(i: usize) -> Self {
        NodeId(i as u32)
    }
}

#[derive(Debug, Clone, Copy)]
struct Span {
    start: u32,
    len: u32,
}

#[derive(Debug, Default)]
pub struct Tape {
    values: Vec<f64>,
    spans: Vec<Span>,
    edges: Vec<(u32, f64)>,
    // parameter index -> leaf node, so each parameter has exactly one leaf
    param_leaf: Vec<u32>,
    leaves: Vec<(u32, usize)>,
}

const NO_LEAF: u32 = u32::MAX;

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Drops all recorded nodes, keeping allocations.
    pub fn clear(&mut self) {
        self.values.clear();
        self.spans.clear();
        self.edges.clear();
        self.param_leaf.iter_mut().for_each(|l| *l = NO_LEAF);
        self.leaves.clear();
    }

    pub fn value(&self, id: NodeId) -> f64 {
        self.values[id.index()]
    }

    fn push(&mut self, value: f64, parents: &[(NodeId, f64)]) -> NodeId {
        let start = self.edges.len() as u32;
        self.edges
            .extend(parents.iter().map(|&(p, d)| (p.0, d)));
        self.spans.push(Span {
            start,
            len: parents.len() as u32,
        });
        self.values.push(value);
        NodeId((self.values.len() - 1) as u32)
    }

    pub fn constant(&mut self, value: f64) -> NodeId {
        self.push(value, &[])
    }

    /// Leaf node for parameter `index`; repeated calls return the same node.
    pub fn param(&mut self, store: &ParamStore, index: usize) -> NodeId {
        if self.param_leaf.len() < store.len() {
            self.param_leaf.resize(store.len(), NO_LEAF);
        }
        let leaf = self.param_leaf[index];
        if leaf != NO_LEAF {
            return NodeId(leaf);
        }
        let id = self.push(store.values()[index], &[]);
        self.param_leaf[index] = id.0;
        self.leaves.push((id.0, index));
        id
    }

    /// Node with an explicit value and explicit local partials.
    pub fn custom(&mut self, value: f64, parents: &[(NodeId, f64)]) -> NodeId {
        self.push(value, parents)
    }

    /// Reverse sweep from `output`, overwriting `store.grads` with
    /// d(output)/d(param). Parameters not reached get zero.
    pub fn backward(&self, output: NodeId, store: &mut ParamStore) -> Result<()> {
        let n = self.values.len();
        if output.index() >= n {
            return Err(Error::DanglingNode {
                id: output.index(),
                len: n,
            });
        }
        let mut adjoint = vec![0.0; output.index() + 1];
        adjoint[output.index()] = 1.0;
        for i in (0..=output.index()).rev() {
            let a = adjoint[i];
            if a == 0.0 {
                continue;
            }
            let span = self.spans[i];
            let edges = &self.edges[span.start as usize..(span.start + span.len) as usize];
            for &(p, d) in edges {
                adjoint[p as usize] += a * d;
            }
        }
        let grads = store.grads_mut();
        grads.iter_mut().for_each(|g| *g = 0.0);
        for &(node, param) in &self.leaves {
            if (node as usize) < adjoint.len() {
                grads[param] = adjoint[node as usize];
            }
        }
        Ok(())
    }
}

/// Scalar arithmetic backend shared by plain evaluation and tape recording.
///
/// `max`/`min` select one operand; on ties the first argument wins, and
/// gradient flows only through the selected operand.
pub trait Arith {
    type V: Copy;

    fn constant(&mut self, x: f64) -> Self::V;
    fn param(&mut self, index: usize) -> Self::V;
    fn value(&self, v: Self::V) -> f64;

    fn add(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn sub(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn mul(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn div(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn neg(&mut self, a: Self::V) -> Self::V;
    fn exp(&mut self, a: Self::V) -> Self::V;
    fn ln(&mut self, a: Self::V) -> Self::V;
    fn sin(&mut self, a: Self::V) -> Self::V;
    fn sqrt(&mut self, a: Self::V) -> Self::V;
    fn tanh(&mut self, a: Self::V) -> Self::V;
    fn relu(&mut self, a: Self::V) -> Self::V;
    /// n-ary sum; `terms` must be nonempty.
    fn sum(&mut self, terms: &[Self::V]) -> Self::V;
    /// Node whose value is computed externally, with given local partials.
    fn implicit(&mut self, value: f64, parents: &[(Self::V, f64)]) -> Self::V;

    fn max(&mut self, a: Self::V, b: Self::V) -> Self::V {
        if self.value(b) > self.value(a) {
            b
        } else {
            a
        }
    }

    fn min(&mut self, a: Self::V, b: Self::V) -> Self::V {
        if self.value(b) < self.value(a) {
            b
        } else {
            a
        }
    }

    /// Clamp to `[lo, hi]`; zero gradient outside the interval.
    fn clamp(&mut self, a: Self::V, lo: f64, hi: f64) -> Self::V {
        let x = self.value(a);
        if x < lo {
            self.constant(lo)
        } else if x > hi {
            self.constant(hi)
        } else {
            a
        }
    }

    fn square(&mut self, a: Self::V) -> Self::V {
        self.mul(a, a)
    }

    /// `bias + sum_i weights[i] * inputs[i]`.
    fn affine(&mut self, weights: &[Self::V], inputs: &[Self::V], bias: Self::V) -> Self::V {
        let mut terms = Vec::with_capacity(weights.len() + 1);
        terms.push(bias);
        for (&w, &x) in weights.iter().zip(inputs) {
            terms.push(self.mul(w, x));
        }
        self.sum(&terms)
    }
}

/// Plain `f64` evaluation against a parameter slice.
pub struct Eval<'a> {
    params: &'a [f64],
}

impl<'a> Eval<'a> {
    pub fn new(params: &'a [f64]) -> Self {
        Self { params }
    }
}

impl Arith for Eval<'_> {
    type V = f64;

    fn constant(&mut self, x: f64) -> f64 {
        x
    }
    fn param(&mut self, index: usize) -> f64 {
        self.params[index]
    }
    fn value(&self, v: f64) -> f64 {
        v
    }
    fn add(&mut self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(&mut self, a: f64, b: f64) -> f64 {
        a - b
    }
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn div(&mut self, a: f64, b: f64) -> f64 {
        a / b
    }
    fn neg(&mut self, a: f64) -> f64 {
        -a
    }
    fn exp(&mut self, a: f64) -> f64 {
        a.exp()
    }
    fn ln(&mut self, a: f64) -> f64 {
        a.ln()
    }
    fn sin(&mut self, a: f64) -> f64 {
        a.sin()
    }
    fn sqrt(&mut self, a: f64) -> f64 {
        a.sqrt()
    }
    fn tanh(&mut self, a: f64) -> f64 {
        a.tanh()
    }
    fn relu(&mut self, a: f64) -> f64 {
        a.max(0.0)
    }
    fn sum(&mut self, terms: &[f64]) -> f64 {
        terms.iter().sum()
    }
    fn implicit(&mut self, value: f64, _parents: &[(f64, f64)]) -> f64 {
        value
    }
    fn affine(&mut self, weights: &[f64], inputs: &[f64], bias: f64) -> f64 {
        weights
            .iter()
            .zip(inputs)
            .fold(bias, |acc, (w, x)| acc + w * x)
    }
}

/// Records every operation onto a tape; parameters come from `store`.
pub struct Record<'a> {
    pub tape: &'a mut Tape,
    store: &'a ParamStore,
}

impl<'a> Record<'a> {
    pub fn new(tape: &'a mut Tape, store: &'a ParamStore) -> Self {
        Self { tape, store }
    }
}

impl Arith for Record<'_> {
    type V = NodeId;

    fn constant(&mut self, x: f64) -> NodeId {
        self.tape.constant(x)
    }
    fn param(&mut self, index: usize) -> NodeId {
        self.tape.param(self.store, index)
    }
    fn value(&self, v: NodeId) -> f64 {
        self.tape.value(v)
    }
    fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a) + self.value(b);
        self.tape.push(v, &[(a, 1.0), (b, 1.0)])
    }
    fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a) - self.value(b);
        self.tape.push(v, &[(a, 1.0), (b, -1.0)])
    }
    fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (x, y) = (self.value(a), self.value(b));
        self.tape.push(x * y, &[(a, y), (b, x)])
    }
    fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (x, y) = (self.value(a), self.value(b));
        self.tape.push(x / y, &[(a, 1.0 / y), (b, -x / (y * y))])
    }
    fn neg(&mut self, a: NodeId) -> NodeId {
        let v = -self.value(a);
        self.tape.push(v, &[(a, -1.0)])
    }
    fn exp(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).exp();
        self.tape.push(v, &[(a, v)])
    }
    fn ln(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        self.tape.push(x.ln(), &[(a, 1.0 / x)])
    }
    fn sin(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        self.tape.push(x.sin(), &[(a, x.cos())])
    }
    fn sqrt(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).sqrt();
        self.tape.push(v, &[(a, 0.5 / v)])
    }
    fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).tanh();
        self.tape.push(v, &[(a, 1.0 - v * v)])
    }
    fn relu(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        if x > 0.0 {
            a
        } else {
            self.tape.constant(0.0)
        }
    }
    fn sum(&mut self, terms: &[NodeId]) -> NodeId {
        let v = terms.iter().map(|&t| self.value(t)).sum();
        let start = self.tape.edges.len() as u32;
        self.tape.edges.extend(terms.iter().map(|t| (t.0, 1.0)));
        self.tape.spans.push(Span {
            start,
            len: terms.len() as u32,
        });
        self.tape.values.push(v);
        NodeId((self.tape.values.len() - 1) as u32)
    }
    fn implicit(&mut self, value: f64, parents: &[(NodeId, f64)]) -> NodeId {
        self.tape.custom(value, parents)
    }
    fn affine(&mut self, weights: &[NodeId], inputs: &[NodeId], bias: NodeId) -> NodeId {
        let tape = &mut *self.tape;
        let start = tape.edges.len() as u32;
        let mut v = tape.values[bias.index()];
        tape.edges.push((bias.0, 1.0));
        for (&w, &x) in weights.iter().zip(inputs) {
            let (wv, xv) = (tape.values[w.index()], tape.values[x.index()]);
            v += wv * xv;
            tape.edges.push((w.0, xv));
            tape.edges.push((x.0, wv));
        }
        tape.spans.push(Span {
            start,
            len: tape.edges.len() as u32 - start,
        });
        tape.values.push(v);
        NodeId((tape.values.len() - 1) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(values: &[f64]) -> ParamStore {
        ParamStore::from_values(values.to_vec())
    }

    #[test]
    fn square_gradient() {
        let mut ps = store(&[3.0]);
        let mut tape = Tape::new();
        let out = {
            let mut r = Record::new(&mut tape, &ps);
            let t = r.param(0);
            r.mul(t, t)
        };
        tape.backward(out, &mut ps).unwrap();
        assert_eq!(ps.grads()[0], 6.0);
    }

    #[test]
    fn constant_output_has_zero_gradient() {
        let mut ps = store(&[3.0]);
        ps.grads_mut()[0] = 42.0;
        let mut tape = Tape::new();
        let out = {
            let mut r = Record::new(&mut tape, &ps);
            let _ = r.param(0);
            r.constant(5.0)
        };
        tape.backward(out, &mut ps).unwrap();
        assert_eq!(ps.grads()[0], 0.0);
    }

    #[test]
    fn dangling_node_is_rejected() {
        let mut ps = store(&[1.0]);
        let tape = Tape::new();
        let err = tape.backward(NodeId::from_index(3), &mut ps).unwrap_err();
        assert!(err.to_string().contains("dangling node"));
    }

    #[test]
    fn max_ties_pick_first_operand() {
        let mut ps = store(&[2.0, 2.0]);
        let mut tape = Tape::new();
        let out = {
            let mut r = Record::new(&mut tape, &ps);
            let a = r.param(0);
            let b = r.param(1);
            r.max(a, b)
        };
        tape.backward(out, &mut ps).unwrap();
        assert_eq!(ps.grads(), &[1.0, 0.0]);
    }

    #[test]
    fn clear_resets_parameter_leaves() {
        let ps = store(&[1.0, 2.0]);
        let mut tape = Tape::new();
        {
            let mut r = Record::new(&mut tape, &ps);
            let a = r.param(1);
            let b = r.param(1);
            assert_eq!(a, b);
        }
        tape.clear();
        assert!(tape.is_empty());
        let mut r = Record::new(&mut tape, &ps);
        assert_eq!(r.param(0).index(), 0);
    }
}
