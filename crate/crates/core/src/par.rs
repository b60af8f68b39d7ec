//! Execution mode switch for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Execution`]. With the
//! `parallel` feature disabled, [`Execution::Parallel`] silently runs
//! sequentially, so results never depend on the mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Smallest index `i` in `0..n` for which `f(i)` is `Some`, with its value.
    /// The parallel path still returns the lowest index.
    pub fn find_first<R, F>(self, n: usize, f: F) -> Option<(usize, R)>
    where
        R: Send,
        F: Fn(usize) -> Option<R> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .find_map_first(|i| f(i).map(|r| (i, r)));
        }
        (0..n).find_map(|i| f(i).map(|r| (i, r)))
    }

    pub fn sort_unstable_by<T, F>(self, items: &mut [T], cmp: F)
    where
        T: Send,
        F: Fn(&T, &T) -> std::cmp::Ordering + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            items.par_sort_unstable_by(cmp);
            return;
        }
        items.sort_unstable_by(cmp);
    }
}
