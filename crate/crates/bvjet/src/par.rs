//! Data-parallel helpers: rayon when the `parallel` feature is active, with a
//! sequential twin that is always compiled (used as the fallback and by the
//! benchmark suite for comparison).

/// Maps `f` over the inputs, sequentially.
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U + Sync + Send,
    T: Send,
    U: Send,
{
    items.into_iter().map(f).collect()
}

/// Maps `f` over the inputs on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U + Sync + Send,
    T: Send,
    U: Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

/// Sequential fallback when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U + Sync + Send,
    T: Send,
    U: Send,
{
    map_seq(items, f)
}

/// True if this build dispatches onto a thread pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
