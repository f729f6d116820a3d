//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) the work is distributed with rayon;
//! without it the same closure runs on one thread. Either way results come
//! back in input order and every reduction downstream happens in index
//! order, so output is bit-identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for sampling loops and tensor assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Use rayon when the `parallel` feature is enabled.
    #[default]
    Auto,
    /// Force single-threaded evaluation.
    Sequential,
}

/// Ordered map over a slice.
pub fn map_ordered<T, R, F>(mode: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        Parallelism::Sequential => items.iter().map(f).collect(),
        Parallelism::Auto => {
            #[cfg(feature = "parallel")]
            {
                items.par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.iter().map(f).collect()
            }
        }
    }
}

/// Ordered map over an index range.
pub fn map_range<R, F>(mode: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Auto => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}
