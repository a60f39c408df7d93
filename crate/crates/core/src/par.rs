//! Execution policy for the data-parallel kernels.
//!
//! Heavy scans (path universes, spectral grids, propagator tables) are
//! written against [`map_indexed`], which fans out over rayon when the
//! `parallel` feature is enabled and degrades to a plain sequential loop
//! otherwise. Public entry points that matter for benchmarking accept an
//! explicit [`Exec`] so the two code paths can be compared directly.

/// Selects how a kernel distributes its work.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// Single-threaded loop, independent of compiled features.
    Sequential,
    /// Rayon work-stealing pool; falls back to sequential when the crate is
    /// built without the `parallel` feature.
    #[default]
    Parallel,
}

/// Maps `f` over `0..len` and collects the results in index order.
pub(crate) fn map_indexed<R, F>(exec: Exec, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..len).map(f).collect(),
        Exec::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..len).map(f).collect()
            }
        }
    }
}
