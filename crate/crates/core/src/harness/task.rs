use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::stream_rng;
use crate::numcore::Vector;

/// Synthetic multiset tasks: the target of a multiset is the left fold of
/// an associative, commutative scalar operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticTask {
    /// `x + y`
    Add,
    /// `x + y + 1`
    Add1,
    /// `cbrt(x^3 + y^3)`
    CbrtSumCubes,
    /// `x y`
    Mul,
    /// `x + y + x y / 2`
    BilinearHalf,
}

pub const ELEMENT_RANGE: (f64, f64) = (-5.0, 5.0);
pub const TRAIN_SIZES: [usize; 3] = [2, 3, 4];
pub const LARGE_SIZES: [usize; 3] = [10, 11, 12];

impl SyntheticTask {
    pub const ALL: [SyntheticTask; 5] = [
        SyntheticTask::Add,
        SyntheticTask::Add1,
        SyntheticTask::CbrtSumCubes,
        SyntheticTask::Mul,
        SyntheticTask::BilinearHalf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticTask::Add => "add",
            SyntheticTask::Add1 => "add1",
            SyntheticTask::CbrtSumCubes => "cbrt_sum_cubes",
            SyntheticTask::Mul => "mul",
            SyntheticTask::BilinearHalf => "bilinear_half",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            SyntheticTask::Add => "x + y",
            SyntheticTask::Add1 => "x + y + 1",
            SyntheticTask::CbrtSumCubes => "cbrt(x^3 + y^3)",
            SyntheticTask::Mul => "x y",
            SyntheticTask::BilinearHalf => "x + y + x y / 2",
        }
    }

    /// Exact scalar operation.
    pub fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            SyntheticTask::Add => x + y,
            SyntheticTask::Add1 => x + y + 1.0,
            SyntheticTask::CbrtSumCubes => (x * x * x + y * y * y).cbrt(),
            SyntheticTask::Mul => x * y,
            SyntheticTask::BilinearHalf => x + y + x * y / 2.0,
        }
    }

    /// Whether the operation has an identity and inverses.
    pub fn is_group(self) -> bool {
        matches!(
            self,
            SyntheticTask::Add | SyntheticTask::Add1 | SyntheticTask::CbrtSumCubes
        )
    }

    /// Polynomial coefficient grid of the operation, when it is one.
    pub fn polynomial(self) -> Option<crate::algebra::SymPoly2> {
        let terms: &[(usize, usize, f64)] = match self {
            SyntheticTask::Add => &[(1, 0, 1.0), (0, 1, 1.0)],
            SyntheticTask::Add1 => &[(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0)],
            SyntheticTask::Mul => &[(1, 1, 1.0)],
            SyntheticTask::BilinearHalf => &[(1, 0, 1.0), (0, 1, 1.0), (1, 1, 0.5)],
            SyntheticTask::CbrtSumCubes => return None,
        };
        Some(crate::algebra::SymPoly2::from_terms(1, terms).expect("valid terms"))
    }

    /// Left fold of the exact operation over a nonempty multiset.
    pub fn fold(self, set: &[Vector]) -> Result<Vector> {
        let (first, rest) = set.split_first().ok_or(Error::EmptyMultiset)?;
        let out = rest.iter().fold(first[0], |acc, x| self.apply(acc, x[0]));
        Vector::new(vec![out])
    }
}

impl fmt::Display for SyntheticTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticTask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SyntheticTask::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = SyntheticTask::ALL.iter().map(|t| t.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown task {s:?}; valid tasks: {}",
                    names.join(", ")
                ))
            })
    }
}

/// A multiset with its target value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub set: Vec<Vector>,
    pub target: Vector,
}

/// `n` multisets with sizes uniform over `sizes` and elements uniform over
/// the task's element range.
pub fn generate_dataset(task: SyntheticTask, n: usize, sizes: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<Example>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset size must be positive".into()));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument("multiset sizes must be positive".into()));
    }
    let (lo, hi) = ELEMENT_RANGE;
    (0..n)
        .map(|_| {
            let size = sizes[rng.random_range(0..sizes.len())];
            let set: Vec<Vector> = (0..size)
                .map(|_| Vector::scalar(rng.random_range(lo..=hi)))
                .collect();
            let target = task.fold(&set)?;
            Ok(Example { set, target })
        })
        .collect()
}

/// Split sizes used by the synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub small_test: usize,
    pub large_test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train: 500,
            validation: 100,
            small_test: 100,
            large_test: 100,
        }
    }
}

/// Train, validation, small-test and large-test data drawn in sequence
/// from a single seeded generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSplits {
    pub task: SyntheticTask,
    pub train: Vec<Example>,
    pub validation: Vec<Example>,
    pub small_test: Vec<Example>,
    pub large_test: Vec<Example>,
}

impl SyntheticSplits {
    pub fn generate(task: SyntheticTask, sizes: SplitSizes, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, crate::harness::DATA_STREAM);
        Ok(Self {
            task,
            train: generate_dataset(task, sizes.train, &TRAIN_SIZES, &mut rng)?,
            validation: generate_dataset(task, sizes.validation, &TRAIN_SIZES, &mut rng)?,
            small_test: generate_dataset(task, sizes.small_test, &TRAIN_SIZES, &mut rng)?,
            large_test: generate_dataset(task, sizes.large_test, &LARGE_SIZES, &mut rng)?,
        })
    }
}
