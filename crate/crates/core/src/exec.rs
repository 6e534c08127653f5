//! Data-parallel helpers. With the `parallel` feature these run on the
//! current rayon pool; without it they fall back to plain iterators. Output
//! order always matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Folds `0..len` in fixed-size chunks and combines the partial results in
/// chunk order, so the reduction is deterministic regardless of scheduling.
pub(crate) fn fold_chunks<A, F, G>(len: usize, chunk: usize, fold: F, combine: G) -> Option<A>
where
    A: Send,
    F: Fn(std::ops::Range<usize>) -> A + Send + Sync,
    G: Fn(A, A) -> A,
{
    let chunk = chunk.max(1);
    let chunks = len.div_ceil(chunk);
    let partials = map_range(chunks, |c| fold(c * chunk..((c + 1) * chunk).min(len)));
    partials.into_iter().reduce(combine)
}

/// Whether this build runs the data-parallel paths on rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
