//! Row-parallel execution helpers.
//!
//! Every pipeline stage writes disjoint output rows from read-only inputs, so
//! each output value is a pure function of the inputs and the results are
//! bit-identical for any worker count. With the `parallel` feature the rows
//! are distributed over the rayon pool; without it the same closures run
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `op(row_index, row)` to each `row_len` chunk of `data`.
pub(crate) fn rows_mut<T, F>(data: &mut [T], row_len: usize, op: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(v, row)| op(v, row));

    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(v, row)| op(v, row));
}

/// Applies `op(row_index, a_row, b_row)` to paired rows of two buffers.
pub(crate) fn rows_zip_mut<T, F>(a: &mut [T], b: &mut [T], row_len: usize, op: F)
where
    T: Send,
    F: Fn(usize, &mut [T], &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    a.par_chunks_mut(row_len)
        .zip(b.par_chunks_mut(row_len))
        .enumerate()
        .for_each(|(v, (ra, rb))| op(v, ra, rb));

    #[cfg(not(feature = "parallel"))]
    a.chunks_mut(row_len)
        .zip(b.chunks_mut(row_len))
        .enumerate()
        .for_each(|(v, (ra, rb))| op(v, ra, rb));
}

/// Like [`rows_zip_mut`] but sums the per-row counts returned by `op`.
pub(crate) fn rows_zip_map_sum<T, F>(a: &mut [T], b: &mut [T], row_len: usize, op: F) -> u64
where
    T: Send,
    F: Fn(usize, &mut [T], &mut [T]) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        a.par_chunks_mut(row_len)
            .zip(b.par_chunks_mut(row_len))
            .enumerate()
            .map(|(v, (ra, rb))| op(v, ra, rb))
            .sum()
    }

    #[cfg(not(feature = "parallel"))]
    {
        a.chunks_mut(row_len)
            .zip(b.chunks_mut(row_len))
            .enumerate()
            .map(|(v, (ra, rb))| op(v, ra, rb))
            .sum()
    }
}
