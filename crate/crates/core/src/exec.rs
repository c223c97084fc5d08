//! Execution policy for data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! always returns results in index order. Reductions are then done
//! sequentially over that vector, so a result never depends on how many
//! workers produced it. With the `parallel` feature disabled the same loops
//! run on the calling thread.

/// How many workers a data-parallel loop may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// Run on the calling thread.
    Sequential,
    /// Use the global rayon pool (all available cores).
    #[default]
    Auto,
    /// Use a dedicated pool of exactly this many threads.
    Threads(usize),
}

impl Workers {
    /// `0` means [`Workers::Auto`], `1` means [`Workers::Sequential`].
    pub fn from_count(n: usize) -> Self {
        match n {
            0 => Workers::Auto,
            1 => Workers::Sequential,
            n => Workers::Threads(n),
        }
    }
}

/// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    imp::map_indexed(n, workers, f)
}

#[cfg(feature = "parallel")]
mod imp {
    use super::Workers;
    use rayon::prelude::*;

    pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match workers {
            Workers::Sequential => (0..n).map(f).collect(),
            Workers::Auto => (0..n).into_par_iter().map(f).collect(),
            Workers::Threads(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                Err(e) => {
                    log::warn!("could not build a {t}-thread pool ({e}); running sequentially");
                    (0..n).map(f).collect()
                }
            },
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    use super::Workers;

    pub fn map_indexed<T, F>(n: usize, _workers: Workers, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
