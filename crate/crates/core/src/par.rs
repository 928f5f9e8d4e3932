// SPDX-License-Identifier: Apache-2.0

//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) callers can pick either strategy at
//! runtime, which is what the benches compare. Without it only
//! [`Execution::Sequential`] exists.

/// How a batch of independent evaluations is run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        Execution::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        Execution::Sequential
    }
}

/// Order-preserving filter-map over a slice.
pub fn filter_map<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().filter_map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().filter_map(f).collect()
        }
    }
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Counts the indices in `range` for which `f` holds.
pub fn count_range<F>(range: std::ops::Range<u64>, exec: Execution, f: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match exec {
        Execution::Sequential => range.filter(|i| f(*i)).count() as u64,
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().filter(|i| f(*i)).count() as u64
        }
    }
}
