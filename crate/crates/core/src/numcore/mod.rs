//! Dense vectors, scalar reverse-mode differentiation, losses and Adam.

pub mod loss;
pub mod params;
pub mod tape;
pub mod vector;

pub use loss::{cosine_with, mse_loss, mse_loss_with, neg_cosine_loss_with};
pub use params::{Adam, ParamStore};
pub use tape::{Arith, Eval, NodeId, Record, Tape};
pub use vector::{cosine, Vector};

/// Central finite-difference gradient of `f` at `x`.
///
/// Used as the independent reference for reverse-mode gradients.
pub fn finite_difference<F>(f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error with a floor of 1e-3 on the denominator, for gradient
/// comparisons where the true derivative may vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}
