//! Reproducible parallel random streams.
//!
//! Work of `total` draws is cut into fixed chunks; chunk `c` draws from
//! ChaCha stream `c` of the user seed. Results depend only on the seed and
//! `total`, never on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Draws per chunk.
pub const CHUNK: usize = 2048;

pub fn substream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `work(rng, count)` on each chunk in parallel and returns the chunk
/// results in chunk order.
pub fn map_chunks<T, F>(total: usize, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(total - c * CHUNK);
            let mut rng = substream(seed, c as u64);
            work(&mut rng, count)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunks_cover_total_and_are_deterministic() {
        let a = map_chunks(5000, 3, |rng, k| (k, rng.random::<u64>()));
        let b = map_chunks(5000, 3, |rng, k| (k, rng.random::<u64>()));
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|(k, _)| k).sum::<usize>(), 5000);
        assert_ne!(a[0].1, a[1].1);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| map_chunks(5000, 3, |rng, k| (k, rng.random::<u64>())));
        assert_eq!(a, c);
    }
}
