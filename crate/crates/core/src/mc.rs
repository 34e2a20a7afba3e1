//! Chunked Monte Carlo execution.
//!
//! Samples are grouped into fixed blocks of [`BLOCK`] draws. Block `k` always consumes substream
//! `k` of the experiment seed, and per-block partial results are returned in block order, so the
//! caller's left fold is identical for every chunk size and worker count. `chunk_size` only
//! controls how many blocks a worker takes at once.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::rng::Stream;

pub const BLOCK: usize = 1 << 10;
pub const DEFAULT_CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McPlan {
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: usize,
}

impl McPlan {
    pub fn new(samples: u64, seed: u64) -> Self {
        McPlan { samples, seed, chunk_size: DEFAULT_CHUNK }
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("samples must be at least 1"));
        }
        if self.chunk_size < BLOCK || !self.chunk_size.is_multiple_of(BLOCK) {
            return Err(invalid(format!("chunk_size must be a positive multiple of {BLOCK}, got {}", self.chunk_size)));
        }
        Ok(())
    }

    fn blocks(&self) -> u64 {
        self.samples.div_ceil(BLOCK as u64)
    }

    fn block_len(&self, block: u64) -> usize {
        let start = block * BLOCK as u64;
        (self.samples - start).min(BLOCK as u64) as usize
    }
}

/// Runs `body(stream, len)` once per block and returns the block results in block order.
pub fn run_blocks<T, F>(plan: &McPlan, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut Stream, usize) -> Result<T> + Sync,
{
    plan.validate()?;
    let per_chunk = (plan.chunk_size / BLOCK) as u64;
    let blocks = plan.blocks();
    let chunks = blocks.div_ceil(per_chunk);
    let nested: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * per_chunk;
            let last = (first + per_chunk).min(blocks);
            (first..last)
                .map(|b| {
                    let mut stream = Stream::substream(plan.seed, b);
                    body(&mut stream, plan.block_len(b))
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(blocks as usize);
    for chunk in nested {
        out.extend(chunk?);
    }
    Ok(out)
}
