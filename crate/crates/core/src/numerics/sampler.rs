//! Seeded, stream-addressable uniform sampling.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A `(seed, stream)` pair naming one independent ChaCha8 sequence.
///
/// ChaCha is counter based, so a stream is fixed by its key and nonce alone and
/// never depends on which thread draws from it or when.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededSampler {
    pub seed: u64,
    pub stream: u64,
}

impl SeededSampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// `n` uniform draws on `[lo, hi)`.
    pub fn uniform(&self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        let mut rng = self.rng();
        (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
    }
}

/// SplitMix64 finalizer over `(seed, index)`; used for per-point seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
