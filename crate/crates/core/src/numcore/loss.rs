use crate::error::{Error, Result};
use crate::numcore::tape::Arith;
use crate::numcore::vector::Vector;

/// Mean over batch and coordinates of the squared error.
pub fn mse_loss(pred: &[Vector], target: &[Vector]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (p, t) in pred.iter().zip(target) {
        if p.dim() != t.dim() {
            return Err(Error::ShapeMismatch {
                expected: t.dim(),
                got: p.dim(),
            });
        }
        total += p
            .iter()
            .zip(t.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        count += p.dim();
    }
    Ok(total / count as f64)
}

/// Recorded MSE over a batch of predicted coordinate lists.
pub fn mse_loss_with<A: Arith>(ops: &mut A, pred: &[Vec<A::V>], target: &[Vector]) -> Result<A::V> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    let mut terms = Vec::new();
    for (p, t) in pred.iter().zip(target) {
        if p.len() != t.dim() {
            return Err(Error::ShapeMismatch {
                expected: t.dim(),
                got: p.len(),
            });
        }
        for (&pv, &tv) in p.iter().zip(t.iter()) {
            let c = ops.constant(tv);
            let diff = ops.sub(pv, c);
            terms.push(ops.square(diff));
        }
    }
    let n = terms.len() as f64;
    let total = ops.sum(&terms);
    let scale = ops.constant(1.0 / n);
    Ok(ops.mul(total, scale))
}

/// Recorded cosine similarity between a prediction and a fixed target.
pub fn cosine_with<A: Arith>(ops: &mut A, pred: &[A::V], target: &Vector) -> Result<A::V> {
    if pred.len() != target.dim() {
        return Err(Error::ShapeMismatch {
            expected: target.dim(),
            got: pred.len(),
        });
    }
    let tnorm = target.norm();
    if tnorm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut dots = Vec::with_capacity(pred.len());
    let mut squares = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target.iter()) {
        let c = ops.constant(t);
        dots.push(ops.mul(p, c));
        squares.push(ops.square(p));
    }
    let dot = ops.sum(&dots);
    let sq = ops.sum(&squares);
    if ops.value(sq) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let pnorm = ops.sqrt(sq);
    let tn = ops.constant(tnorm);
    let denom = ops.mul(pnorm, tn);
    Ok(ops.div(dot, denom))
}

/// Mean negative cosine over a batch.
pub fn neg_cosine_loss_with<A: Arith>(
    ops: &mut A,
    pred: &[Vec<A::V>],
    target: &[Vector],
) -> Result<A::V> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    let mut terms = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(target) {
        terms.push(cosine_with(ops, p, t)?);
    }
    let total = ops.sum(&terms);
    let scale = ops.constant(-1.0 / pred.len() as f64);
    Ok(ops.mul(total, scale))
}
