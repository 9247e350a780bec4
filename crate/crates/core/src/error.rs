use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dangling node: id {id} but tape has {len} nodes")]
    DanglingNode { id: usize, len: usize },

    #[error("diverged: {0}")]
    Diverged(String),

    #[error("diverged at epoch {epoch}: {reason}")]
    TrainingDiverged {
        epoch: usize,
        reason: String,
        /// Per-epoch mean losses completed before the failure.
        curve: Vec<f64>,
    },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("zero vector")]
    ZeroVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("inversion out of range: no bracket for target {target} within 1024 doublings")]
    InversionOutOfRange { target: f64 },

    #[error("not a group: the elementwise-product combiner has no guaranteed identity or inverse")]
    NotAGroup,

    #[error("empty multiset")]
    EmptyMultiset,

    #[error("degenerate Lipschitz product: a*K1*K2 = {0} must exceed 1")]
    DegenerateLipschitz(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree {degree} exceeds the supported bound {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("not symmetric: coefficient ({i},{j}) differs from ({j},{i})")]
    NotSymmetric { i: usize, j: usize },

    #[error("zero gamma coefficient at coordinate {0}")]
    ZeroGamma(usize),

    #[error("model kind mismatch: expected {expected}, found {found}")]
    ModelKindMismatch { expected: String, found: String },

    #[error("checkpoint version mismatch: file has {found}, supported {supported}")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("truncated checkpoint: {0}")]
    Truncated(String),

    #[error("checkpoint checksum failure: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown token {0:?}")]
    UnknownToken(String),

    #[error("all {} trials diverged (seeds {:?})", .0.len(), .0)]
    AllTrialsDiverged(Vec<u64>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable numeric code per failure class, used by checkpoint loaders and the CLI.
    pub fn code(&self) -> u32 {
        match self {
            Error::VersionMismatch { .. } => 10,
            Error::Truncated(_) => 11,
            Error::Checksum { .. } => 12,
            Error::BadCheckpoint(_) => 13,
            Error::ModelKindMismatch { .. } => 14,
            Error::Diverged(_) | Error::TrainingDiverged { .. } => 20,
            Error::AllTrialsDiverged(_) => 21,
            Error::Parse { .. } => 30,
            Error::Io(_) => 40,
            _ => 1,
        }
    }
}
