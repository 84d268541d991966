use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Permutation of `0..n` for one epoch; the epoch selects the RNG stream.
pub fn epoch_permutation(n: usize, seed: u64, epoch: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Full batches of `batch_size` indices; the trailing partial batch is dropped.
pub fn batch_iterator(
    n: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 || batch_size > n {
        return Err(Error::Config(format!(
            "batch size {batch_size} must be between 1 and the dataset size {n}"
        )));
    }
    Ok(epoch_permutation(n, seed, epoch)
        .chunks_exact(batch_size)
        .map(|c| c.to_vec())
        .collect())
}
