//! Seedable, splittable random streams.

use rand::{Error, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// ChaCha20 stream keyed by a `u64` seed.
///
/// [`split`](RunRng::split) derives an independent stream from the same seed
/// and a 64-bit stream id, so a batch can hand trial `i` the stream `i`
/// without any draws from the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRng {
    seed: u64,
    inner: ChaCha20Rng,
}

impl RunRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn split(&self, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(self.seed);
        inner.set_stream(stream.wrapping_add(1));
        Self { seed: self.seed, inner }
    }

    /// Seed for trial `index` of a batch started from `master`.
    pub fn trial_seed(master: u64, index: u64) -> u64 {
        Self::new(master).split(index).next_u64()
    }
}

impl RngCore for RunRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.inner.try_fill_bytes(dest)
    }
}
