//! Batch evaluation over independent parameter points.
//!
//! With the `parallel` feature (default) work is spread over the rayon
//! global pool; without it everything runs on the calling thread. Results
//! always come back in input order, so outputs are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled.
pub fn map_points<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_points_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_points_sequential(items, f)
    }
}

pub fn map_points_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_points_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Runs two closures, potentially concurrently.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Fills `out[j] = f(j)` for every index, row-parallel when enabled.
pub fn fill_indexed<R, F>(out: &mut [R], f: F)
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(j, v)| *v = f(j));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.iter_mut().enumerate().for_each(|(j, v)| *v = f(j));
    }
}

/// Evenly spaced lattice `start, start + step, ...` up to `end` (inclusive
/// within half a step).
pub fn lattice(start: f64, end: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || end < start {
        return Vec::new();
    }
    let n = ((end - start) / step + 0.5).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}
