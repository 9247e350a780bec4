//! Abelian group and semigroup networks.
//!
//! A binary operation `x o y = phi^-1(phi(x) + phi(y))` (group) or
//! `phi^-1(phi(x) * phi(y))` (semigroup, elementwise product) built from a
//! trainable invertible map `phi`, together with multiset aggregation,
//! algebraic-law checks, a symbolic classifier for associative symmetric
//! polynomials, a DeepSets baseline, a synthetic training harness and a
//! word-analogy pipeline.

pub mod abelian;
pub mod analogy;
pub mod algebra;
pub mod baseline;
pub mod error;
pub mod harness;
pub mod invertible;
pub mod numcore;

pub use abelian::{AbelianOp, Combiner};
pub use baseline::DeepSetsModel;
pub use error::{Error, Result};
pub use invertible::{CouplingFlow, InvertibleMap, MonotonicNet};
pub use numcore::{cosine, Adam, ParamStore, Tape, Vector};
pub use algebra::{classify, CanonicalForm, Classification, SymPoly2};
pub use analogy::{AnalogyKind, AnalogyModel, EmbeddingTable};
pub use harness::{Checkpoint, ModelKind, SetModel, SyntheticTask, TrainConfig};
