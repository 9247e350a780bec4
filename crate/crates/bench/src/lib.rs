//! Seeded inputs shared by the criterion benchmarks in `benches/`.

use abelian_core::harness::{stream_rng, SplitSizes, SyntheticSplits, SyntheticTask, DATA_STREAM, INIT_STREAM};
use abelian_core::{CouplingFlow, MonotonicNet, Vector};
use rand::Rng;

pub const SEED: u64 = 7;

pub fn monotonic(groups: usize, units: usize) -> MonotonicNet {
    MonotonicNet::new(groups, units, &mut stream_rng(SEED, INIT_STREAM))
}

pub fn coupling(dim: usize, layers: usize, hidden: usize) -> CouplingFlow {
    CouplingFlow::random(dim, layers, hidden, 0.5, &mut stream_rng(SEED, INIT_STREAM)).expect("valid flow")
}

/// `n` vectors with coordinates in `[-2, 2)`.
pub fn points(dim: usize, n: usize) -> Vec<Vector> {
    let mut rng = stream_rng(SEED, DATA_STREAM);
    (0..n)
        .map(|_| Vector::new((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).expect("finite"))
        .collect()
}

pub fn splits(task: SyntheticTask) -> SyntheticSplits {
    let sizes = SplitSizes {
        train: 500,
        validation: 10,
        small_test: 10,
        large_test: 10,
    };
    SyntheticSplits::generate(task, sizes, SEED).expect("valid sizes")
}
