//! Parallel/sequential execution helpers.
//!
//! Every data-parallel loop in this crate goes through these functions so that
//! the `parallel` feature (rayon) and the sequential fallback produce
//! bit-identical results: work is split into deterministic chunks, partial
//! results are collected in index order, and reductions run sequentially over
//! the collected parts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, preserving index order in the output.
pub(crate) fn map_indices<U, F>(n: usize, parallel: bool, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Sum of `f(i)` over `0..n` with a deterministic reduction order.
///
/// Partial values are materialized in index order and folded sequentially, so
/// the result does not depend on thread scheduling.
pub(crate) fn sum_indices<F>(n: usize, parallel: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indices(n, parallel, f).iter().sum()
}
