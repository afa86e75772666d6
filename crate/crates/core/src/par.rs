//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over the rayon pool; without it the same fold runs sequentially. Only
//! associative, commutative reductions are used, so results do not depend
//! on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` and folds the results with `reduce`.
pub fn map_reduce<T, F, R, I>(n: usize, identity: I, f: F, reduce: R) -> T
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
    I: Fn() -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).reduce(identity, reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).fold(identity(), reduce)
    }
}

/// Runs `op` on a pool of `width` workers (ignored when sequential).
pub fn with_workers<T: Send>(width: usize, op: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(width.max(1)).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = width;
        op()
    }
}

/// Default worker count: `BOOTLAB_WORKERS` if set, else the number of
/// available cores.
pub fn default_workers() -> usize {
    std::env::var("BOOTLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
