use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::{Arith, Eval, ParamStore};

/// Default residual tolerance for [`MonotonicNet::inverse`].
pub const DEFAULT_INVERSE_TOL: f64 = 1e-10;

const MAX_DOUBLINGS: usize = 1024;

/// One-dimensional min-max monotonic network with a learned sign:
///
/// `f(x) = min_k max_j s * exp(w[k][j]) * x + b[k][j]`
///
/// Parameter layout: `groups * units` pre-weights, then the same number of
/// biases, then the sign coefficient `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicNet {
    groups: usize,
    units: usize,
    tol: f64,
    params: ParamStore,
}

impl MonotonicNet {
    /// Random net: pre-weights ~ U(-1, 0), biases ~ U(-1, 1), s = 1.
    pub fn new<R: Rng>(groups: usize, units: usize, rng: &mut R) -> Self {
        assert!(groups >= 1 && units >= 1);
        let n = groups * units;
        let mut values = Vec::with_capacity(2 * n + 1);
        values.extend((0..n).map(|_| rng.random_range(-1.0..0.0)));
        values.extend((0..n).map(|_| rng.random_range(-1.0..1.0)));
        values.push(1.0);
        Self::from_values(groups, units, values)
    }

    /// Builds a net from explicit pre-weights and biases, indexed `[k][j]`.
    pub fn from_parts(w_tilde: &[Vec<f64>], b: &[Vec<f64>], s: f64) -> Result<Self> {
        let groups = w_tilde.len();
        let units = w_tilde.first().map_or(0, Vec::len);
        if groups == 0
            || units == 0
            || b.len() != groups
            || w_tilde.iter().chain(b).any(|row| row.len() != units)
        {
            return Err(Error::InvalidArgument(
                "monotonic net needs equal-sized nonempty weight and bias grids".into(),
            ));
        }
        let mut values: Vec<f64> = w_tilde.iter().flatten().copied().collect();
        values.extend(b.iter().flatten());
        values.push(s);
        Ok(Self::from_values(groups, units, values))
    }

    pub(crate) fn from_values(groups: usize, units: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), 2 * groups * units + 1);
        Self {
            groups,
            units,
            tol: DEFAULT_INVERSE_TOL,
            params: ParamStore::from_values(values),
        }
    }

    /// `f(x) = x`.
    pub fn identity() -> Self {
        Self::from_values(1, 1, vec![0.0, 0.0, 1.0])
    }

    /// `f(x) = slope * x + offset`; `slope` must be nonzero.
    pub fn affine(slope: f64, offset: f64) -> Self {
        assert!(slope != 0.0);
        Self::from_values(1, 1, vec![slope.abs().ln(), offset, slope.signum()])
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0);
        self.tol = tol;
        self
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn sign(&self) -> f64 {
        self.params.values()[self.sign_index()]
    }

    fn n_units(&self) -> usize {
        self.groups * self.units
    }

    fn sign_index(&self) -> usize {
        2 * self.n_units()
    }

    /// Effective slope and bias of unit `(k, j)`.
    pub fn unit(&self, k: usize, j: usize) -> (f64, f64) {
        let v = self.params.values();
        let i = k * self.units + j;
        (v[self.sign_index()] * v[i].exp(), v[self.n_units() + i])
    }

    pub fn forward(&self, x: f64) -> f64 {
        let (k, j) = self.active_unit(x);
        let (w, b) = self.unit(k, j);
        w * x + b
    }

    /// The unit realising the min-max at `x`, ties to the lowest index.
    pub fn active_unit(&self, x: f64) -> (usize, usize) {
        let v = self.params.values();
        let s = v[self.sign_index()];
        let n = self.n_units();
        let mut best: Option<((usize, usize), f64)> = None;
        for k in 0..self.groups {
            let mut group: Option<(usize, f64)> = None;
            for j in 0..self.units {
                let i = k * self.units + j;
                let z = s * v[i].exp() * x + v[n + i];
                if group.is_none_or(|(_, m)| z > m) {
                    group = Some((j, z));
                }
            }
            let (j, z) = group.unwrap();
            if best.is_none_or(|(_, m)| z < m) {
                best = Some(((k, j), z));
            }
        }
        best.unwrap().0
    }

    pub fn forward_with<A: Arith>(&self, ops: &mut A, x: A::V) -> A::V {
        let n = self.n_units();
        let s = ops.param(self.sign_index());
        let mut outer: Option<A::V> = None;
        for k in 0..self.groups {
            let mut inner: Option<A::V> = None;
            for j in 0..self.units {
                let i = k * self.units + j;
                let wt = ops.param(i);
                let e = ops.exp(wt);
                let w = ops.mul(s, e);
                let b = ops.param(n + i);
                let z = ops.affine(&[w], &[x], b);
                inner = Some(match inner {
                    None => z,
                    Some(m) => ops.max(m, z),
                });
            }
            let g = inner.unwrap();
            outer = Some(match outer {
                None => g,
                Some(m) => ops.min(m, g),
            });
        }
        outer.unwrap()
    }

    /// Solves `f(x) = y` by bracket doubling from [-1, 1] and bisection,
    /// followed by an exact solve on the active linear piece when that
    /// lowers the residual.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.inverse_tol(y, self.tol)
    }

    pub fn inverse_tol(&self, y: f64, tol: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::NonFinite("monotonic inverse target"));
        }
        let increasing = self.sign() > 0.0;
        // g(x) = f(x) - y oriented so that g is increasing
        let g = |x: f64| {
            let r = self.forward(x) - y;
            if increasing {
                r
            } else {
                -r
            }
        };
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut found = false;
        for _ in 0..MAX_DOUBLINGS {
            if !lo.is_finite() || !hi.is_finite() {
                break;
            }
            if g(lo) <= 0.0 && g(hi) >= 0.0 {
                found = true;
                break;
            }
            lo *= 2.0;
            hi *= 2.0;
        }
        if !found {
            return Err(Error::InversionOutOfRange { target: y });
        }

        let mut best = if g(lo).abs() < g(hi).abs() { lo } else { hi };
        loop {
            let mid = 0.5 * (lo + hi);
            let r = g(mid);
            if r.abs() < g(best).abs() {
                best = mid;
            }
            if r.abs() < tol || mid <= lo || mid >= hi {
                break;
            }
            if r < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let (k, j) = self.active_unit(best);
        let (w, b) = self.unit(k, j);
        let exact = (y - b) / w;
        if exact.is_finite() && g(exact).abs() < g(best).abs() {
            best = exact;
        }
        Ok(best)
    }

    /// Recorded inverse. The value comes from [`Self::inverse`]; gradients
    /// come from the implicit function theorem on the active unit, where
    /// `x = (y - b) / w`.
    pub fn inverse_with<A: Arith>(&self, ops: &mut A, y: A::V) -> Result<A::V> {
        let x = self.inverse(ops.value(y))?;
        let (k, j) = self.active_unit(x);
        let i = k * self.units + j;
        let s = ops.param(self.sign_index());
        let wt = ops.param(i);
        let e = ops.exp(wt);
        let w = ops.mul(s, e);
        let b = ops.param(self.n_units() + i);
        let wv = ops.value(w);
        Ok(ops.implicit(x, &[(y, 1.0 / wv), (b, -1.0 / wv), (w, -x / wv)]))
    }

    /// Exact range of |f'| over `[lo, hi]`, from the breakpoints of the
    /// piecewise-linear function.
    pub fn slope_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut cuts = vec![lo, hi];
        let units: Vec<(f64, f64)> = (0..self.groups)
            .flat_map(|k| (0..self.units).map(move |j| (k, j)))
            .map(|(k, j)| self.unit(k, j))
            .collect();
        for (a, &(w1, b1)) in units.iter().enumerate() {
            for &(w2, b2) in &units[a + 1..] {
                if w1 != w2 {
                    let x = (b2 - b1) / (w1 - w2);
                    if x > lo && x < hi {
                        cuts.push(x);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let (k, j) = self.active_unit(0.5 * (w[0] + w[1]));
            let slope = self.unit(k, j).0.abs();
            min = min.min(slope);
            max = max.max(slope);
        }
        (min, max)
    }

    /// Forward evaluation through the generic path; used to cross-check
    /// the fast scalar path.
    pub fn forward_generic(&self, x: f64) -> f64 {
        let mut ops = Eval::new(self.params.values());
        self.forward_with(&mut ops, x)
    }
}
