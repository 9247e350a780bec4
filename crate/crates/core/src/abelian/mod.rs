//! Abelian group networks (sum combiner) and Abelian semigroup networks
//! (elementwise-product combiner), multiset folding, and the
//! size-generalization bound.

pub mod bound;
pub mod op;

pub use bound::{ceil_log, estimate_lipschitz, size_gen_bound, BoxDomain, LipschitzEstimate, SizeGenBound};
pub use op::{AbelianOp, Combiner};
