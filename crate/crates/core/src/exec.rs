//! Data-parallel building blocks with a sequential fallback.
//!
//! With the default `parallel` feature the heavy fills (correlator matrices,
//! Monte Carlo blocks, verification campaigns) run on the rayon pool; without
//! it everything degrades to plain iterators with identical results. Outputs
//! are positioned by index, never reduced across threads, so results do not
//! depend on the pool size.

#[cfg(feature = "parallel")]
pub fn map_indexed<R, F>(count: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R + Sync + Send,
    R: Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<R, F>(count: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R + Sync + Send,
    R: Send,
{
    (0..count).map(f).collect()
}
