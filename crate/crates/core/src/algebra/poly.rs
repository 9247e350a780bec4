use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported degree per variable for symbolic checks.
pub const MAX_DEGREE: usize = 4;

/// Relative tolerance for coefficient comparisons.
pub const COEFF_TOL: f64 = 1e-12;

const WITNESS_SEED: u64 = 0x5eed_ab11;
const WITNESS_TRIALS: usize = 100;

/// Two-variable polynomial `x * y = sum_{i,j} c[i][j] x^i y^j` read as a
/// binary operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymPoly2 {
    coeffs: Vec<Vec<f64>>,
}

impl SymPoly2 {
    /// `coeffs[i][j]` multiplies `x^i y^j`; the grid must be square.
    pub fn new(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 || coeffs.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("coefficient grid must be square and nonempty".into()));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(Self { coeffs })
    }

    /// Grid of size `(degree + 1)^2` holding the given `(i, j, value)` terms.
    pub fn from_terms(degree: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut coeffs = vec![vec![0.0; degree + 1]; degree + 1];
        for &(i, j, c) in terms {
            if i > degree || j > degree {
                return Err(Error::InvalidArgument(format!("term x^{i} y^{j} exceeds degree {degree}")));
            }
            coeffs[i][j] += c;
        }
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// First asymmetric coefficient pair, if any.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        let n = self.coeffs.len();
        let scale = self.scale();
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.coeffs[i][j] - self.coeffs[j][i]).abs() > COEFF_TOL * scale {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in both variables
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |a, &c| a * y + c)
        })
    }

    fn scale(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .fold(1.0f64, |m, c| m.max(c.abs()))
    }
}

/// Outcome of an associativity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Associativity {
    pub associative: bool,
    /// Largest coefficient difference between the two bracketings.
    pub max_coeff_diff: f64,
    /// Triple where `(x*y)*z` and `x*(y*z)` differ most among the sampled
    /// triples; present only when not associative.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub left: f64,
    pub right: f64,
}

/// Dense polynomial in two variables, `c[a][b]` multiplies `u^a v^b`.
#[derive(Clone)]
struct Dense2 {
    n: usize,
    c: Vec<f64>,
}

impl Dense2 {
    fn zeros(n: usize) -> Self {
        Self { n, c: vec![0.0; n * n] }
    }

    fn one(n: usize) -> Self {
        let mut p = Self::zeros(n);
        p.c[0] = 1.0;
        p
    }

    fn get(&self, a: usize, b: usize) -> f64 {
        self.c[a * self.n + b]
    }

    fn mul(&self, other: &Dense2) -> Dense2 {
        let n = self.n;
        let mut out = Dense2::zeros(n);
        for a1 in 0..n {
            for b1 in 0..n {
                let c1 = self.get(a1, b1);
                if c1 == 0.0 {
                    continue;
                }
                for a2 in 0..n - a1 {
                    for b2 in 0..n - b1 {
                        let c2 = other.get(a2, b2);
                        if c2 != 0.0 {
                            out.c[(a1 + a2) * n + b1 + b2] += c1 * c2;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Symbolically expands `(x*y)*z` and `x*(y*z)` and compares coefficients.
pub fn is_associative(p: &SymPoly2) -> Result<Associativity> {
    let n = p.degree();
    if n > MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree: n,
            max: MAX_DEGREE,
        });
    }
    // powers of x*y have degree at most n^2 in each variable
    let width = n * n + 1;
    let mut base = Dense2::zeros(width);
    for i in 0..=n {
        for j in 0..=n {
            base.c[i * width + j] = p.coeff(i, j);
        }
    }
    let mut powers = vec![Dense2::one(width)];
    for k in 1..=n {
        let next = powers[k - 1].mul(&base);
        powers.push(next);
    }

    // (x*y)*z = sum_{i,c} p[i][c] P^i(x, y) z^c
    // x*(y*z) = sum_{a,j} p[a][j] x^a P^j(y, z)
    let idx = |a: usize, b: usize, c: usize| (a * width + b) * width + c;
    let mut left = vec![0.0; width * width * width];
    let mut right = vec![0.0; width * width * width];
    for i in 0..=n {
        for c in 0..=n {
            let coef = p.coeff(i, c);
            if coef == 0.0 {
                continue;
            }
            for a in 0..width {
                for b in 0..width {
                    let t = powers[i].get(a, b);
                    if t != 0.0 {
                        left[idx(a, b, c)] += coef * t;
                    }
                }
            }
        }
    }
    for a in 0..=n {
        for j in 0..=n {
            let coef = p.coeff(a, j);
            if coef == 0.0 {
                continue;
            }
            for b in 0..width {
                for c in 0..width {
                    let t = powers[j].get(b, c);
                    if t != 0.0 {
                        right[idx(a, b, c)] += coef * t;
                    }
                }
            }
        }
    }
    let scale = left
        .iter()
        .chain(&right)
        .fold(1.0f64, |m, c| m.max(c.abs()));
    let max_coeff_diff = left
        .iter()
        .zip(&right)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    let associative = max_coeff_diff <= COEFF_TOL * scale;
    let witness = (!associative).then(|| find_witness(p));
    Ok(Associativity {
        associative,
        max_coeff_diff,
        witness,
    })
}

/// Largest-discrepancy triple among seeded random samples in [-2, 2]^3.
pub fn find_witness(p: &SymPoly2) -> Witness {
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    let mut best: Option<Witness> = None;
    for _ in 0..WITNESS_TRIALS {
        let (x, y, z) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let left = p.eval(p.eval(x, y), z);
        let right = p.eval(x, p.eval(y, z));
        let w = Witness { x, y, z, left, right };
        if best.is_none_or(|b| (left - right).abs() > (b.left - b.right).abs()) {
            best = Some(w);
        }
    }
    best.unwrap()
}
