//! Row-partitioned execution. With the `parallel` feature rows go to rayon,
//! otherwise they run in order. Callers only hand out disjoint rows or fixed
//! row blocks, so the output never depends on the schedule.

use alloc::vec::Vec;
use core::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Calls `f(y, row)` for every `row_len`-sized row of `out`.
pub(crate) fn for_each_row<T, F>(out: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
}

/// Splits `0..rows` into consecutive blocks of `block` rows and returns
/// `f(block_range)` for each, in block order.
pub(crate) fn map_row_blocks<R, F>(rows: usize, block: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    let block = block.max(1);
    let n_blocks = rows.div_ceil(block);
    let range = move |b: usize| b * block..((b + 1) * block).min(rows);
    #[cfg(feature = "parallel")]
    {
        (0..n_blocks).into_par_iter().map(|b| f(range(b))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_blocks).map(|b| f(range(b))).collect()
    }
}
