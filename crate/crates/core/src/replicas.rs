//! Deterministic per-replica seeds and the replica map.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed of replica `index` under `base_seed`: the first word of keystream
/// `index` of a ChaCha8 generator keyed by `base_seed`.
pub fn replica_seed(base_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Runs `f(index, seed)` for every replica and returns the results in index
/// order, independent of how the work is scheduled.
pub fn map_replicas<T, F>(replicas: usize, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..replicas)
            .into_par_iter()
            .map(|i| f(i, replica_seed(base_seed, i as u64)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..replicas)
            .map(|i| f(i, replica_seed(base_seed, i as u64)))
            .collect()
    }
}
