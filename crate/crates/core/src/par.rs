//! Execution strategy for the data-parallel loops in this crate.
//!
//! Every parallel loop maps an index range to a `Vec` in index order and the
//! caller reduces that vector sequentially, so floating-point results do not
//! depend on how many worker threads ran the map.

/// How a data-parallel loop is executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work stealing when the `rayon` feature is enabled, otherwise
    /// identical to [`Exec::Sequential`].
    #[default]
    Parallel,
}

impl Exec {
    /// True when this strategy will actually use worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "rayon") && self == Exec::Parallel
    }
}

/// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
#[cfg(feature = "rayon")]
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match exec {
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        Exec::Sequential => (0..n).map(f).collect(),
    }
}

/// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
#[cfg(not(feature = "rayon"))]
pub fn map_range<R, F>(_exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps every element of a slice, preserving order.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

/// Installs a global worker pool with `threads` workers. Returns false if a
/// pool was already installed or the feature is disabled.
#[cfg(feature = "rayon")]
pub fn init_threads(threads: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_ok()
}

/// Installs a global worker pool with `threads` workers. Returns false if a
/// pool was already installed or the feature is disabled.
#[cfg(not(feature = "rayon"))]
pub fn init_threads(_threads: usize) -> bool {
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = map_range(Exec::Parallel, 1000, |i| i * i);
        let b = map_range(Exec::Sequential, 1000, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }
}
