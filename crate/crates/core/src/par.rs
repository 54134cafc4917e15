//! Index-parallel map used by the force loop and the quadrature levels.
//!
//! With the `parallel` feature the work runs on rayon; otherwise, or when a
//! single thread is requested, it runs in order on the calling thread. Results
//! are always returned in index order, so reductions done by the caller are
//! independent of the thread count.

/// Evaluate `f(i)` for `i in 0..n` and collect in index order.
///
/// `threads = None` uses the ambient rayon pool; `Some(k)` runs on a pool of
/// `k` workers.
pub fn map_indexed<T, F>(n: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n <= 1 || threads == Some(1) {
        return (0..n).map(f).collect();
    }
    parallel_map(n, threads, f)
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        None => (0..n).into_par_iter().map(f).collect(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, _threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// True when the crate was built with the rayon backend.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
