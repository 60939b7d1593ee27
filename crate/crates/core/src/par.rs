//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the hot loops run on the rayon
//! global pool. Every reduction here is order-independent or collected in
//! index order, so results are bit-identical across thread counts and across
//! the two execution modes.

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// Maps `f` over a slice and collects the results in slice order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}

/// Counts the indices in `0..n` for which `pred` holds.
pub fn count_range<F>(exec: Execution, n: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).filter(|&i| pred(i)).count() as u64,
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().filter(|&i| pred(i)).count() as u64
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers; `threads == 0` keeps
/// the global pool. Without the `parallel` feature this just calls `f`.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

