//! Shared fixtures for the criterion benches.

use leadsel_core::model::generate_instance;
use leadsel_core::rng::derive_seed;
use leadsel_core::Instance;

/// `count` random instances of size `n`, seeded the same way the benchmark
/// grid seeds them.
pub fn instances(n: usize, count: usize, master: u64) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let seed = derive_seed(master, &[n as u64, i as u64]);
            generate_instance(n, seed, None).expect("valid size")
        })
        .collect()
}
