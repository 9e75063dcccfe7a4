//! Deterministic random substreams.
//!
//! Large samples are generated in fixed-size chunks. Chunk `c` draws from a
//! ChaCha8 stream keyed by `(seed, c)`, and chunk outputs are concatenated in
//! chunk order, so the result does not depend on how many threads run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Number of draws per substream chunk.
pub const CHUNK_LEN: usize = 1 << 16;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Stream for a single-threaded caller.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Substream `chunk` of `seed`.
pub fn substream(seed: u64, chunk: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Generate `n` values in parallel chunks; `draw` produces one value from a stream.
pub fn par_generate<T, F>(n: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Stream) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK_LEN);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
            let mut rng = substream(seed, c as u64);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.extend(part);
    }
    out
}

/// Sum with a fixed reduction tree: fixed-size blocks summed left to right,
/// block sums combined in order. Bit-stable for any thread count.
pub fn stable_sum<I>(values: &[I], f: impl Fn(&I) -> f64 + Sync) -> f64
where
    I: Sync,
{
    const BLOCK: usize = 4096;
    let partial: Vec<f64> = values
        .par_chunks(BLOCK)
        .map(|block| block.iter().map(&f).sum::<f64>())
        .collect();
    partial.iter().sum()
}
