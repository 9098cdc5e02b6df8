//! Parallel Monte Carlo path execution with output independent of the
//! thread count.

use ksym_core::experiments::PathExecutor;
use rayon::prelude::*;

/// Evaluates paths on the current rayon thread pool. `collect` on an indexed
/// parallel iterator places every result at its path's position, so the
/// returned vector — and therefore every sequential reduction downstream —
/// is identical to a serial run regardless of scheduling.
pub struct ThreadedExecutor;

impl PathExecutor for ThreadedExecutor {
    fn map_paths<T: Send>(&self, n_paths: u64, f: &(dyn Fn(u64) -> T + Sync)) -> Vec<T> {
        (0..n_paths).into_par_iter().map(f).collect()
    }
}

/// Runs `body` on a rayon pool with exactly `threads` workers (a fresh
/// scoped pool, so the global pool's size never constrains or leaks into
/// the run).
pub fn with_thread_count<R: Send>(threads: usize, body: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction only fails on resource exhaustion");
    pool.install(body)
}
