//! Indexed parallel map with a serial fallback on wasm.
//!
//! Results come back ordered by index regardless of scheduling, which is
//! what keeps replication reports invariant to thread count.

#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
