//! Seeded, shardable Monte Carlo driver.
//!
//! Trials are cut into fixed-size blocks. Block `b` draws from a ChaCha8
//! generator seeded with the run seed on stream `b`, so the random numbers a
//! trial sees depend only on `(seed, trial index)`. Shards take blocks
//! round-robin and results are reassembled in block order, which makes every
//! aggregate independent of the shard count, floating-point sums included.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const BLOCK_SIZE: u64 = 4096;

/// Generator for one block of trials.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// A contiguous range of trials handled with one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub index: u64,
    pub first_trial: u64,
    pub len: u64,
}

pub fn blocks(trials: u64) -> impl Iterator<Item = Block> {
    let n = trials.div_ceil(BLOCK_SIZE);
    (0..n).map(move |index| {
        let first_trial = index * BLOCK_SIZE;
        Block {
            index,
            first_trial,
            len: BLOCK_SIZE.min(trials - first_trial),
        }
    })
}

/// Runs `work` on every block across `shards` threads and returns the
/// per-block results in block order.
pub fn run_blocks<T, F>(trials: u64, seed: u64, shards: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Block, &mut ChaCha8Rng) -> T + Sync,
{
    if shards == 0 {
        return Err(Error::InvalidParameter(
            "shard count must be at least 1".into(),
        ));
    }
    let all: Vec<Block> = blocks(trials).collect();
    if shards == 1 || all.len() <= 1 {
        return Ok(all
            .into_iter()
            .map(|b| work(b, &mut block_rng(seed, b.index)))
            .collect());
    }
    let mut tagged: Vec<(u64, T)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|s| {
                let mine: Vec<Block> = all.iter().copied().skip(s).step_by(shards).collect();
                let work = &work;
                scope.spawn(move || {
                    mine.into_iter()
                        .map(|b| (b.index, work(b, &mut block_rng(seed, b.index))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("Monte Carlo shard panicked"))
            .collect()
    });
    tagged.sort_by_key(|(i, _)| *i);
    Ok(tagged.into_iter().map(|(_, t)| t).collect())
}

/// Binomial standard error of an empirical frequency.
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}
