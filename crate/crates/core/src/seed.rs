//! Stable seed derivation for counter-based random streams.
//!
//! Every random draw in the pipeline is keyed by an identity tuple rather than
//! by its position in a sequential stream, so execution order and parallelism
//! never change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `master` and every key component into a single 64-bit seed.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Hashes a label to a key component (FNV-1a; stable across builds and platforms).
pub fn label_key(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// ChaCha8 generator for the stream identified by `(master, keys)`.
pub fn stream(master: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, keys))
}
