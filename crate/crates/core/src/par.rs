//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! pool; without it they are plain sequential iterators. Output order always
//! matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_range<U, F>(range: std::ops::Range<usize>, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(range: std::ops::Range<usize>, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    range.map(f).collect()
}

/// First index (in input order) for which `f` returns `Some`.
#[cfg(feature = "parallel")]
pub fn find_first<T, U, F>(items: &[T], f: F) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    items.par_iter().map(f).find_first(|r| r.is_some()).flatten()
}

#[cfg(not(feature = "parallel"))]
pub fn find_first<T, U, F>(items: &[T], f: F) -> Option<U>
where
    F: Fn(&T) -> Option<U>,
{
    items.iter().find_map(f)
}
