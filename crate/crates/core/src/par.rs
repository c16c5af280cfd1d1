use rayon::prelude::*;

/// Maps `f` over `0..n` on `workers` threads and returns results in index order.
///
/// Results are bit-identical for every worker count: each item is computed
/// independently and any reduction happens afterwards in index order.
pub(crate) fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || n < 64 {
        return (0..n).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}
