use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Fraction of each class that goes to the test set, plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Result<Self> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::Split(format!(
                "test fraction must lie in (0, 1), got {test_fraction}"
            )));
        }
        Ok(Self {
            test_fraction,
            seed,
        })
    }

    /// Test-set size for a class of `count` samples, rounded half up.
    pub fn test_count(&self, count: usize) -> usize {
        (self.test_fraction * count as f64 + 0.5).floor() as usize
    }
}

/// Splits `ds` into `(train, test)` class by class.
///
/// Each class contributes `round_half_up(test_fraction · class_count)` samples
/// to the test set. Samples are drawn with a ChaCha8 shuffle seeded by
/// `spec.seed`, so the partition depends only on `(ds, seed)`. Both partitions
/// keep the original sample order.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    SplitSpec::new(spec.test_fraction, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut is_test = vec![false; ds.n_samples()];

    for (class, name) in [(-1.0, "-1"), (1.0, "+1")] {
        let mut members: Vec<usize> = ds
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let k = spec.test_count(members.len());
        if k == 0 {
            return Err(Error::Split(format!(
                "class {name} has {} samples; fraction {} puts none of them in the test set",
                members.len(),
                spec.test_fraction
            )));
        }
        if k >= members.len() {
            return Err(Error::Split(format!(
                "class {name} has {} samples; fraction {} leaves none for training",
                members.len(),
                spec.test_fraction
            )));
        }
        members.shuffle(&mut rng);
        for &i in &members[..k] {
            is_test[i] = true;
        }
    }

    let (test_rows, train_rows): (Vec<usize>, Vec<usize>) =
        (0..ds.n_samples()).partition(|&i| is_test[i]);
    Ok((ds.subset(&train_rows)?, ds.subset(&test_rows)?))
}
