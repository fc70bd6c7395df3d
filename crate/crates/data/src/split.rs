//! Seeded random splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wfair_core::Dataset;

use crate::error::{DataError, Result};

/// Disjoint train and test row indices, each ascending. The same
/// `(n, train, test, seed)` always gives the same split.
pub fn split_indices(n: usize, train: usize, test: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if train + test > n {
        return Err(DataError::SplitSize { train, test, available: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut a = order[..train].to_vec();
    let mut b = order[train..train + test].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    Ok((a, b))
}

/// Random `(train, test)` split of an encoded dataset.
pub fn split(data: &Dataset, sizes: (usize, usize), seed: u64) -> Result<(Dataset, Dataset)> {
    let (a, b) = split_indices(data.len(), sizes.0, sizes.1, seed)?;
    Ok((data.subset(&a)?, data.subset(&b)?))
}
