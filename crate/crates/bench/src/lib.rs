//! Shared inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cumulative loss vectors shaped like mid-run states: one leader near zero,
/// the rest spread over `[0, scale)`.
pub fn cumulative_losses(d: usize, count: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut l: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..scale)).collect();
            l[rng.random_range(0..d)] = 0.0;
            l
        })
        .collect()
}
