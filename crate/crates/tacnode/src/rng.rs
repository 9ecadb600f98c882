//! Seeded substreams and deterministic chunked parallel reductions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Independent stream `stream` of the master seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `total` trials into fixed-size chunks, runs chunk k on substream
/// k and returns the per-chunk results in chunk order. The split does not
/// depend on the thread count, so results are reproducible.
pub fn run_chunks<T, F>(total: u64, chunk: u64, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunk = chunk.max(1);
    let count = total.div_ceil(chunk);
    (0..count)
        .into_par_iter()
        .map(|k| {
            let len = chunk.min(total - k * chunk);
            work(&mut substream(seed, k), len)
        })
        .collect()
}

/// Reads LAB_THREADS and installs a global pool of that size once.
/// Returns the thread count in effect.
pub fn configure_threads_from_env() -> usize {
    if let Some(n) = std::env::var("LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    rayon::current_num_threads()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunks_are_thread_count_independent() {
        let work = |r: &mut ChaCha8Rng, len: u64| (0..len).map(|_| r.random::<f64>()).sum::<f64>();
        let a = run_chunks(1000, 64, 7, work);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_chunks(1000, 64, 7, work));
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn streams_differ() {
        let x: u64 = substream(1, 0).random();
        let y: u64 = substream(1, 1).random();
        assert_ne!(x, y);
    }
}
