//! Execution mode for the data-parallel loops of the crate.
//!
//! Every hot loop (greedy candidate scans, exhaustive search, sweep grid
//! cells, influence-matrix products) goes through [`Exec`]. With the
//! `parallel` feature enabled, [`Exec::Parallel`] fans out over rayon's
//! global pool; without it, both variants run sequentially. Results are
//! identical in either mode: every reduction is done in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..len).map(f).collect()`, possibly in parallel. Output order is index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Like [`Exec::map`] but hands each worker at least `min_len` consecutive indices.
    pub fn map_chunked<T, F>(self, len: usize, min_len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len)
                .into_par_iter()
                .with_min_len(min_len.max(1))
                .map(f)
                .collect();
        }
        let _ = min_len;
        (0..len).map(f).collect()
    }

    /// Map over the items of a slice, keeping slice order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}
