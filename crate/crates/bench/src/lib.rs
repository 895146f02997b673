//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sdlog::pipelines::fixtures::{make_dlog_fixture, DlogFixture};
use sdlog::quantum::{AlgorithmParams, OutcomePair, SecretInstance};

pub fn bench_rng() -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(0xBE7C4)
}

/// The m = 12, s = 2 instance the end-to-end experiments run at.
pub fn standard_instance() -> SecretInstance {
    let params = AlgorithmParams::derive(12, 2, None).unwrap();
    SecretInstance::new(2741, params).unwrap()
}

pub fn standard_fixture() -> DlogFixture {
    let mut rng = bench_rng();
    make_dlog_fixture(12, 2, None, None, Some(2741), &mut rng).unwrap()
}

/// A pair of good outcomes for the standard instance.
pub fn good_pairs(inst: &SecretInstance, count: usize) -> Vec<OutcomePair> {
    inst.good_j_values()
        .unwrap()
        .filter(|j| j % 7 == 1) // spread the j values out
        .take(count)
        .map(|j| OutcomePair {
            j,
            k: inst.best_k(j),
        })
        .collect()
}
