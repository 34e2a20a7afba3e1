//! Seeded random streams.
//!
//! Every stream is a ChaCha8 keystream: the key is derived from the experiment seed and the
//! 64-bit stream id selects an independent substream. Substream `k` of seed `s` is therefore a
//! pure function of `(s, k)`, which is what makes chunked simulation reproducible regardless of
//! how chunks are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        rng.set_word_pos(0);
        Stream(rng)
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
