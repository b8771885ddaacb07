//! Seeded, order-stable fan-out of Monte Carlo work.
//!
//! Work is split into fixed-size chunks. Chunk `i` draws from the ChaCha8
//! stream `i` of the root seed, and chunk results are merged in index
//! order. The thread count and the [`Execution`] mode therefore never change
//! a result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How chunked work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Run every chunk on the calling thread.
    Sequential,
    /// Spread chunks over the rayon pool. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether chunks actually run concurrently in this build.
    pub fn is_concurrent(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Independent random stream `index` of the root `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Splits `total` items into chunks of `chunk` and returns `(start, len)`
/// for each.
pub fn chunk_ranges(total: usize, chunk: usize) -> Vec<(usize, usize)> {
    assert!(chunk > 0);
    (0..total.div_ceil(chunk))
        .map(|i| {
            let start = i * chunk;
            (start, chunk.min(total - start))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream(7, 0).random();
        let b: u64 = stream(7, 1).random();
        let c: u64 = stream(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn modes_agree() {
        let f = |i: usize| {
            let mut rng = stream(11, i as u64);
            (0..100).map(|_| rng.random::<f64>()).sum::<f64>()
        };
        assert_eq!(map_indexed(64, Execution::Parallel, f), map_indexed(64, Execution::Sequential, f));
    }

    #[test]
    fn chunking_covers_everything() {
        let r = chunk_ranges(10, 4);
        assert_eq!(r, vec![(0, 4), (4, 4), (8, 2)]);
        assert!(chunk_ranges(0, 4).is_empty());
    }
}
