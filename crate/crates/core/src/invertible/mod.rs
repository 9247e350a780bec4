//! Invertible maps used as the embedding `phi` of Abelian networks: a
//! one-dimensional monotonic network and a multi-dimensional affine
//! coupling flow.

pub mod coupling;
pub mod mlp;
pub mod monotonic;

pub use coupling::{CouplingFlow, CouplingLayer, DEFAULT_CLAMP};
pub use mlp::Mlp;
pub use monotonic::{MonotonicNet, DEFAULT_INVERSE_TOL};

use crate::error::{Error, Result};
use crate::numcore::{Arith, ParamStore, Vector};

/// A trainable bijection of R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum InvertibleMap {
    Monotonic(MonotonicNet),
    Coupling(CouplingFlow),
}

impl InvertibleMap {
    pub fn dim(&self) -> usize {
        match self {
            InvertibleMap::Monotonic(_) => 1,
            InvertibleMap::Coupling(f) => f.dim(),
        }
    }

    pub fn params(&self) -> &ParamStore {
        match self {
            InvertibleMap::Monotonic(n) => n.params(),
            InvertibleMap::Coupling(f) => f.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        match self {
            InvertibleMap::Monotonic(n) => n.params_mut(),
            InvertibleMap::Coupling(f) => f.params_mut(),
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &Vector) -> Result<Vector> {
        self.check(x.dim())?;
        match self {
            InvertibleMap::Monotonic(n) => Ok(Vector::from_raw(vec![n.forward(x[0])])),
            InvertibleMap::Coupling(f) => f.forward(x),
        }
    }

    pub fn inverse(&self, y: &Vector) -> Result<Vector> {
        self.check(y.dim())?;
        match self {
            InvertibleMap::Monotonic(n) => Ok(Vector::from_raw(vec![n.inverse(y[0])?])),
            InvertibleMap::Coupling(f) => f.inverse(y),
        }
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, x: &[A::V]) -> Result<Vec<A::V>> {
        self.check(x.len())?;
        match self {
            InvertibleMap::Monotonic(n) => Ok(vec![n.forward_with(ops, x[0])]),
            InvertibleMap::Coupling(f) => f.forward_with(ops, x),
        }
    }

    pub fn inverse_with<A: Arith>(&self, ops: &mut A, y: &[A::V]) -> Result<Vec<A::V>> {
        self.check(y.len())?;
        match self {
            InvertibleMap::Monotonic(n) => Ok(vec![n.inverse_with(ops, y[0])?]),
            InvertibleMap::Coupling(f) => f.inverse_with(ops, y),
        }
    }
}

impl From<MonotonicNet> for InvertibleMap {
    fn from(n: MonotonicNet) -> Self {
        InvertibleMap::Monotonic(n)
    }
}

impl From<CouplingFlow> for InvertibleMap {
    fn from(f: CouplingFlow) -> Self {
        InvertibleMap::Coupling(f)
    }
}
