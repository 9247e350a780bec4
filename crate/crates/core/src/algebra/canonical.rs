use crate::algebra::classify::{CanonicalForm, FormKind};
use crate::error::{Error, Result};
use crate::invertible::InvertibleMap;
use crate::numcore::Vector;

/// Semigroup operation `x o y = rho^-1(form(rho(x), rho(y)))` with the form
/// applied coordinate-wise using per-coordinate coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalOp {
    kind: FormKind,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    rho: InvertibleMap,
}

impl CanonicalOp {
    /// Per-coordinate coefficients. For the bilinear kind the constant
    /// term is `beta (beta - 1) / gamma` and `alpha` is ignored.
    pub fn with_coefficients(
        kind: FormKind,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        gamma: Vec<f64>,
        rho: InvertibleMap,
    ) -> Result<Self> {
        let d = rho.dim();
        for v in [&alpha, &beta, &gamma] {
            if v.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
        let alpha = match kind {
            FormKind::Bilinear => {
                if let Some(i) = gamma.iter().position(|&g| g == 0.0) {
                    return Err(Error::ZeroGamma(i));
                }
                beta.iter()
                    .zip(&gamma)
                    .map(|(b, g)| b * (b - 1.0) / g)
                    .collect()
            }
            _ => alpha,
        };
        Ok(Self {
            kind,
            alpha,
            beta,
            gamma,
            rho,
        })
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn rho(&self) -> &InvertibleMap {
        &self.rho
    }

    pub fn apply(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        let rx = self.rho.forward(x)?;
        let ry = self.rho.forward(y)?;
        let z = (0..rx.dim())
            .map(|i| match self.kind {
                FormKind::Constant => self.alpha[i],
                FormKind::Additive => self.alpha[i] + rx[i] + ry[i],
                FormKind::Bilinear => {
                    self.alpha[i] + self.beta[i] * (rx[i] + ry[i]) + self.gamma[i] * rx[i] * ry[i]
                }
            })
            .collect();
        self.rho.inverse(&Vector::new(z)?)
    }

    /// Left fold over a nonempty multiset.
    pub fn fold(&self, set: &[Vector]) -> Result<Vector> {
        let (first, rest) = set.split_first().ok_or(Error::EmptyMultiset)?;
        rest.iter()
            .try_fold(first.clone(), |acc, x| self.apply(&acc, x))
    }
}

/// Broadcasts a scalar canonical form over every coordinate of `rho`.
pub fn canonical_semigroup_op(form: &CanonicalForm, rho: InvertibleMap) -> Result<CanonicalOp> {
    let d = rho.dim();
    CanonicalOp::with_coefficients(
        form.kind,
        vec![form.alpha; d],
        vec![form.beta; d],
        vec![form.gamma; d],
        rho,
    )
}
