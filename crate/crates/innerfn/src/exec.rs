//! Deterministic reductions.
//!
//! Every sum in this crate is reduced over a fixed binary tree: the index
//! range is split at its midpoint until a leaf of at most [`LEAF`] elements
//! remains, and leaves are folded left to right.  The tree shape depends only
//! on the input length, so the result is bit-identical whether the two halves
//! run on one thread or on the rayon pool.

use crate::error::Result;

/// Maximum number of elements folded sequentially in one leaf.
pub const LEAF: usize = 64;

/// Minimum range length before a split is handed to the thread pool.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 4096;

/// Fixed-tree pairwise sum of `f(i)` for `i` in `0..n`.
pub fn map_sum<F>(n: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range(0, n, f)
}

/// Fixed-tree pairwise sum of a slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    map_sum(values.len(), &|i| values[i])
}

/// Strictly sequential variant of [`map_sum`] over the same tree.
///
/// Exists so benchmarks can compare the two paths; the results are
/// bit-identical by construction.
pub fn map_sum_seq<F>(n: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range_seq(0, n, f)
}

fn sum_range<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        return (lo..hi).map(f).sum();
    }
    let mid = lo + len / 2;
    #[cfg(feature = "parallel")]
    {
        if len >= PAR_THRESHOLD {
            let (a, b) = rayon::join(|| sum_range(lo, mid, f), || sum_range(mid, hi, f));
            return a + b;
        }
    }
    sum_range(lo, mid, f) + sum_range(mid, hi, f)
}

fn sum_range_seq<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        return (lo..hi).map(f).sum();
    }
    let mid = lo + len / 2;
    sum_range_seq(lo, mid, f) + sum_range_seq(mid, hi, f)
}

/// Fallible fixed-tree sum.  On error the lowest-indexed failure wins, so the
/// reported error does not depend on scheduling.
pub fn try_map_sum<F>(n: usize, f: &F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    try_sum_range(0, n, f)
}

fn try_sum_range<F>(lo: usize, hi: usize, f: &F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i)?;
        }
        return Ok(acc);
    }
    let mid = lo + len / 2;
    #[cfg(feature = "parallel")]
    {
        if len >= PAR_THRESHOLD {
            let (a, b) = rayon::join(|| try_sum_range(lo, mid, f), || try_sum_range(mid, hi, f));
            return Ok(a? + b?);
        }
    }
    Ok(try_sum_range(lo, mid, f)? + try_sum_range(mid, hi, f)?)
}

/// Fallible fixed-tree sum of pairs (e.g. value and accumulated error bound).
pub fn try_map_sum2<F>(n: usize, f: &F) -> Result<(f64, f64)>
where
    F: Fn(usize) -> Result<(f64, f64)> + Sync,
{
    try_sum2_range(0, n, f)
}

fn try_sum2_range<F>(lo: usize, hi: usize, f: &F) -> Result<(f64, f64)>
where
    F: Fn(usize) -> Result<(f64, f64)> + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in lo..hi {
            let (x, y) = f(i)?;
            a += x;
            b += y;
        }
        return Ok((a, b));
    }
    let mid = lo + len / 2;
    #[cfg(feature = "parallel")]
    {
        if len >= PAR_THRESHOLD {
            let (l, r) = rayon::join(|| try_sum2_range(lo, mid, f), || try_sum2_range(mid, hi, f));
            let (la, lb) = l?;
            let (ra, rb) = r?;
            return Ok((la + ra, lb + rb));
        }
    }
    let (la, lb) = try_sum2_range(lo, mid, f)?;
    let (ra, rb) = try_sum2_range(mid, hi, f)?;
    Ok((la + ra, lb + rb))
}

/// Maps `0..n` to a vector, in parallel when available.  Output order is by
/// index regardless of scheduling.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if n >= 2 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Fallible ordered map; the lowest-indexed error wins.
pub fn try_map_collect<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let items = map_collect(n, f);
    items.into_iter().collect()
}
