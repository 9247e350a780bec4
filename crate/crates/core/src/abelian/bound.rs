use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invertible::InvertibleMap;
use crate::numcore::Vector;

/// Inputs of the size-generalization bound for group networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeGenBound {
    /// Error bound on multisets of size at most `a`.
    pub epsilon: f64,
    /// Small-size threshold, at least 2.
    pub a: u64,
    /// Evaluation size, at least `a`.
    pub b: u64,
    /// Lipschitz constant of phi.
    pub k1: f64,
    /// Lipschitz constant of phi^-1.
    pub k2: f64,
}

/// `eps * ((a K1 K2)^ceil(log_a b) - 1) / (a K1 K2 - 1)`.
pub fn size_gen_bound(sg: &SizeGenBound) -> Result<f64> {
    if sg.a < 2 || sg.b < sg.a {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= a <= b, got a={} b={}",
            sg.a, sg.b
        )));
    }
    if !(sg.epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
    }
    let q = sg.a as f64 * sg.k1 * sg.k2;
    if !(q > 1.0) {
        return Err(Error::DegenerateLipschitz(q));
    }
    let depth = ceil_log(sg.a, sg.b);
    Ok(sg.epsilon * (q.powi(depth as i32) - 1.0) / (q - 1.0))
}

/// Smallest `t` with `a^t >= b`, in exact integer arithmetic.
pub fn ceil_log(a: u64, b: u64) -> u32 {
    let mut t = 0;
    let mut p: u128 = 1;
    while p < b as u128 {
        p *= a as u128;
        t += 1;
    }
    t
}

/// Axis-aligned box `[lo, hi]` in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidArgument("box needs lo < hi in every coordinate".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| rng.random_range(l..h))
            .collect()
    }

    fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }
}

/// Empirical Lipschitz constants of a map and of its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub k1: f64,
    pub k2: f64,
    /// Always true: sampled ratios can only under-estimate the constants.
    pub lower_bound: bool,
}

/// Maximum difference-quotient ratios over `samples` random points of the
/// box, each paired with another random point and with a nearby point.
/// `k2` uses the reciprocal ratio on the same pairs, so the estimate covers
/// the inverse on the image of the box.
pub fn estimate_lipschitz(
    map: &InvertibleMap,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if domain.dim() != map.dim() {
        return Err(Error::ShapeMismatch {
            expected: map.dim(),
            got: domain.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1e-4 * domain.diameter();
    let mut k1 = 0.0f64;
    let mut k2 = 0.0f64;
    for _ in 0..samples {
        let u = domain.sample(&mut rng);
        let far = domain.sample(&mut rng);
        let near: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let y = x + step * rng.random_range(-1.0..1.0);
                y.clamp(domain.lo[i], domain.hi[i])
            })
            .collect();
        let fu = map.forward(&Vector::new(u.clone())?)?;
        for v in [far, near] {
            let dx = l2(&u, &v);
            if dx == 0.0 {
                continue;
            }
            let fv = map.forward(&Vector::new(v)?)?;
            let dy = l2(fu.as_slice(), fv.as_slice());
            if dy == 0.0 {
                continue;
            }
            k1 = k1.max(dy / dx);
            k2 = k2.max(dx / dy);
        }
    }
    Ok(LipschitzEstimate {
        k1,
        k2,
        lower_bound: true,
    })
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invertible::{CouplingFlow, MonotonicNet};

    fn bound(epsilon: f64, a: u64, b: u64, k1: f64, k2: f64) -> Result<f64> {
        size_gen_bound(&SizeGenBound { epsilon, a, b, k1, k2 })
    }

    #[test]
    fn bound_examples() {
        assert!((bound(0.1, 2, 4, 1.0, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert!((bound(0.1, 2, 2, 1.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        // (6^3 - 1) / 5 = 43
        assert!((bound(0.01, 3, 10, 2.0, 1.0).unwrap() - 0.43).abs() < 1e-15);
    }

    #[test]
    fn bound_rejects_degenerate_product() {
        assert!(matches!(
            bound(0.1, 2, 4, 0.5, 1.0),
            Err(Error::DegenerateLipschitz(_))
        ));
        assert!(bound(0.1, 1, 4, 1.0, 1.0).is_err());
        assert!(bound(0.1, 4, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn ceil_log_is_exact_at_powers() {
        assert_eq!(ceil_log(2, 4), 2);
        assert_eq!(ceil_log(2, 5), 3);
        assert_eq!(ceil_log(3, 10), 3);
        assert_eq!(ceil_log(4, 12), 2);
        assert_eq!(ceil_log(4, 4), 1);
        assert_eq!(ceil_log(10, 1000), 3);
    }

    #[test]
    fn identity_map_has_unit_constants() {
        let dom = BoxDomain::cube(1, -3.0, 3.0).unwrap();
        let est = estimate_lipschitz(&MonotonicNet::identity().into(), &dom, 100, 1).unwrap();
        assert_eq!((est.k1, est.k2), (1.0, 1.0));
        let flow: InvertibleMap = CouplingFlow::identity(3, 2, 4).unwrap().into();
        let dom = BoxDomain::cube(3, -3.0, 3.0).unwrap();
        let est = estimate_lipschitz(&flow, &dom, 100, 1).unwrap();
        assert!((est.k1 - 1.0).abs() < 1e-12 && (est.k2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_map_constants() {
        let dom = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        let est = estimate_lipschitz(&MonotonicNet::affine(2.0, 0.0).into(), &dom, 50, 2).unwrap();
        assert!(est.k1 >= 2.0 - 1e-9 && est.k2 >= 0.5 - 1e-9);
        assert!(est.lower_bound);
    }

    #[test]
    fn too_few_samples() {
        let dom = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        assert!(estimate_lipschitz(&MonotonicNet::identity().into(), &dom, 1, 0).is_err());
    }
}
