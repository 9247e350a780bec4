//! Associative symmetric polynomials: symbolic associativity checks,
//! classification into the three canonical forms, and the semigroup
//! operations those forms generate through an invertible map.

pub mod canonical;
pub mod classify;
pub mod poly;

pub use canonical::{canonical_semigroup_op, CanonicalOp};
pub use classify::{classify, CanonicalForm, Classification, FormKind};
pub use poly::{find_witness, is_associative, Associativity, SymPoly2, Witness, MAX_DEGREE};
