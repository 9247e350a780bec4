use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::poly::{find_witness, SymPoly2, Witness, COEFF_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormKind {
    /// `x * y = alpha`
    Constant,
    /// `x * y = alpha + x + y`
    Additive,
    /// `x * y = beta (beta - 1) / gamma + beta (x + y) + gamma x y`
    Bilinear,
}

/// One of the three associative symmetric polynomial forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub kind: FormKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CanonicalForm {
    pub fn constant(alpha: f64) -> Self {
        Self {
            kind: FormKind::Constant,
            alpha,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    pub fn additive(alpha: f64) -> Self {
        Self {
            kind: FormKind::Additive,
            alpha,
            beta: 1.0,
            gamma: 0.0,
        }
    }

    /// The constant term is derived as `beta (beta - 1) / gamma`.
    pub fn bilinear(beta: f64, gamma: f64) -> Result<Self> {
        if gamma == 0.0 {
            return Err(Error::ZeroGamma(0));
        }
        Ok(Self {
            kind: FormKind::Bilinear,
            alpha: beta * (beta - 1.0) / gamma,
            beta,
            gamma,
        })
    }

    /// Evaluates the scalar operation.
    pub fn apply(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            FormKind::Constant => self.alpha,
            FormKind::Additive => self.alpha + x + y,
            FormKind::Bilinear => self.alpha + self.beta * (x + y) + self.gamma * x * y,
        }
    }

    /// Coefficient grid of the form, degree 1.
    pub fn to_poly(&self) -> SymPoly2 {
        let (b, g) = match self.kind {
            FormKind::Constant => (0.0, 0.0),
            FormKind::Additive => (1.0, 0.0),
            FormKind::Bilinear => (self.beta, self.gamma),
        };
        SymPoly2::new(vec![vec![self.alpha, b], vec![b, g]]).expect("finite coefficients")
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FormKind::Constant => write!(f, "Constant α={}", self.alpha),
            FormKind::Additive => write!(f, "Additive α={}", self.alpha),
            FormKind::Bilinear => write!(f, "Bilinear β={} γ={}", self.beta, self.gamma),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    Canonical(CanonicalForm),
    NotAssociative(Witness),
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Canonical(form) => form.fmt(f),
            Classification::NotAssociative(w) => write!(
                f,
                "NotAssociative witness (x={}, y={}, z={}): (x*y)*z={} x*(y*z)={}",
                w.x, w.y, w.z, w.left, w.right
            ),
        }
    }
}

/// Matches a symmetric polynomial against the three associative forms.
///
/// Works from the coefficient pattern alone; anything that is not one of
/// the forms is reported with a numeric witness.
pub fn classify(p: &SymPoly2) -> Result<Classification> {
    if let Some((i, j)) = p.asymmetry() {
        return Err(Error::NotSymmetric { i, j });
    }
    let scale = p
        .coeffs()
        .iter()
        .flatten()
        .fold(1.0f64, |m, c| m.max(c.abs()));
    let zero = |c: f64| c.abs() <= COEFF_TOL * scale;
    let n = p.degree();
    let higher_vanish = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| i >= 2 || j >= 2)
        .all(|(i, j)| zero(p.coeff(i, j)));
    if higher_vanish {
        let alpha = p.coeff(0, 0);
        let beta = p.coeff(1, 0);
        let gamma = p.coeff(1, 1);
        if zero(gamma) {
            if zero(beta) {
                return Ok(Classification::Canonical(CanonicalForm::constant(alpha)));
            }
            if zero(beta - 1.0) {
                return Ok(Classification::Canonical(CanonicalForm::additive(alpha)));
            }
        } else if zero(alpha * gamma - beta * (beta - 1.0)) {
            return Ok(Classification::Canonical(CanonicalForm::bilinear(beta, gamma)?));
        }
    }
    Ok(Classification::NotAssociative(find_witness(p)))
}
