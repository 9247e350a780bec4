//! Synthetic multiset tasks, training, evaluation and hyperparameter search.

mod checkpoint;
mod export;
mod model;
mod search;
mod task;
mod train;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION,
};
pub use export::{write_results_csv, write_results_json, ResultRow};
pub use model::{ModelHyper, ModelKind, SetModel};
pub use search::{random_search, SearchOutcome, SearchSpace, TrialRecord, DEFAULT_TRIALS};
pub use task::{
    generate_dataset, Example, SplitSizes, SyntheticSplits, SyntheticTask, ELEMENT_RANGE, LARGE_SIZES,
    TRAIN_SIZES,
};
pub use train::{evaluate, max_abs_error, rmse_with, run_experiment, train, ExperimentResult, TrainConfig, TrainReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DATA_STREAM: u64 = 1;
pub const INIT_STREAM: u64 = 2;
pub const SHUFFLE_STREAM: u64 = 3;
pub const SEARCH_STREAM: u64 = 4;
pub const ANALOGY_STREAM: u64 = 5;

/// Independent generator for one purpose under a run seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
