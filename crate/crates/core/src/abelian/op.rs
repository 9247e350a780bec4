use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invertible::InvertibleMap;
use crate::numcore::{Arith, Vector};

/// How embedded elements are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Combiner {
    /// `phi(x) + phi(y)`: an Abelian group.
    Sum,
    /// `phi(x) * phi(y)` elementwise: an Abelian semigroup.
    ElementwiseProduct,
}

impl Combiner {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Combiner::Sum => a + b,
            Combiner::ElementwiseProduct => a * b,
        }
    }
}

/// Binary operation `phi^-1(phi(x) (+|*) phi(y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianOp {
    phi: InvertibleMap,
    combiner: Combiner,
}

impl AbelianOp {
    pub fn new(phi: impl Into<InvertibleMap>, combiner: Combiner) -> Self {
        Self {
            phi: phi.into(),
            combiner,
        }
    }

    /// Abelian group network.
    pub fn group(phi: impl Into<InvertibleMap>) -> Self {
        Self::new(phi, Combiner::Sum)
    }

    /// Abelian semigroup network.
    pub fn semigroup(phi: impl Into<InvertibleMap>) -> Self {
        Self::new(phi, Combiner::ElementwiseProduct)
    }

    pub fn phi(&self) -> &InvertibleMap {
        &self.phi
    }

    pub fn phi_mut(&mut self) -> &mut InvertibleMap {
        &mut self.phi
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn binop(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        let px = self.phi.forward(x)?;
        let py = self.phi.forward(y)?;
        let z: Vec<f64> = px
            .iter()
            .zip(py.iter())
            .map(|(&a, &b)| self.combiner.combine(a, b))
            .collect();
        self.finish(z)
    }

    /// `e = phi^-1(0)`; only defined for the group combiner.
    pub fn identity_element(&self) -> Result<Vector> {
        self.require_group()?;
        self.finish(vec![0.0; self.dim()])
    }

    /// `x^-1 = phi^-1(-phi(x))`; only defined for the group combiner.
    pub fn inverse_element(&self, x: &Vector) -> Result<Vector> {
        self.require_group()?;
        let px = self.phi.forward(x)?;
        self.finish(px.iter().map(|v| -v).collect())
    }

    /// Left fold of the combiner over `phi` of every element, in stored
    /// order, followed by one inversion.
    pub fn fold_multiset(&self, set: &[Vector]) -> Result<Vector> {
        let (first, rest) = set.split_first().ok_or(Error::EmptyMultiset)?;
        let mut acc = self.phi.forward(first)?.into_inner();
        for x in rest {
            let px = self.phi.forward(x)?;
            for (a, &b) in acc.iter_mut().zip(px.iter()) {
                *a = self.combiner.combine(*a, b);
            }
        }
        self.finish(acc)
    }

    /// Recorded version of [`Self::fold_multiset`] for training.
    pub fn fold_with<A: Arith>(&self, ops: &mut A, set: &[Vector]) -> Result<Vec<A::V>> {
        let (first, rest) = set.split_first().ok_or(Error::EmptyMultiset)?;
        let embed = |ops: &mut A, x: &Vector| -> Result<Vec<A::V>> {
            let xs: Vec<A::V> = x.iter().map(|&v| ops.constant(v)).collect();
            self.phi.forward_with(ops, &xs)
        };
        let mut acc = embed(ops, first)?;
        for x in rest {
            let px = embed(ops, x)?;
            for (a, b) in acc.iter_mut().zip(px) {
                *a = match self.combiner {
                    Combiner::Sum => ops.add(*a, b),
                    Combiner::ElementwiseProduct => ops.mul(*a, b),
                };
            }
        }
        self.phi.inverse_with(ops, &acc)
    }

    fn finish(&self, z: Vec<f64>) -> Result<Vector> {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("combined embedding"));
        }
        let out = self.phi.inverse(&Vector::from_raw(z))?;
        if !out.is_finite() {
            return Err(Error::NonFinite("abelian operation output"));
        }
        Ok(out)
    }

    fn require_group(&self) -> Result<()> {
        match self.combiner {
            Combiner::Sum => Ok(()),
            Combiner::ElementwiseProduct => Err(Error::NotAGroup),
        }
    }
}
