//! Two realizations of the Quickselect comparison count `C_{n,m}`.
//!
//! The array engine runs Hoare-style selection on concrete data and counts
//! element-to-pivot comparisons. The recursion engine draws the same count
//! distribution directly from the size recursion
//! `C_{n,m} = n-1 + C_{V,m} 1(V >= m) + C_{n-V-1, m-V-1} 1(V < m-1)`
//! with `V = floor(n*u)` uniform on `{0, ..., n-1}`, and `C_{n,m} = 0` for
//! `n <= m-1`. Both engines consume one uniform per partitioning level, so
//! they share a randomness convention (pivot position = `floor(len * u)`).

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Outcome of an array-engine run: the comparison count and the selected
/// element (absent when the rank exceeds the list length).
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySelection {
    pub comparisons: u64,
    pub selected: Option<f64>,
}

/// Run Quickselect on `data` for the `m`-th smallest element, counting
/// comparisons to the pivot. Elements must be pairwise distinct; a
/// duplicate that meets a pivot is reported as an error. If `m` exceeds
/// the list length the count is 0 and no element is returned.
pub fn select_count_array(
    data: &[f64],
    m: usize,
    stream: &mut RandomStream,
) -> Result<ArraySelection> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if m > data.len() {
        return Ok(ArraySelection {
            comparisons: 0,
            selected: None,
        });
    }

    let mut buf = data.to_vec();
    let target = m - 1;
    let mut lo = 0usize;
    let mut hi = buf.len();
    let mut comparisons = 0u64;

    // Iterative so that n = 1e7 does not exhaust the call stack.
    loop {
        let len = hi - lo;
        if len == 1 {
            return Ok(ArraySelection {
                comparisons,
                selected: Some(buf[lo]),
            });
        }

        let u = stream.next_uniform();
        let pivot_idx = lo + ((len as f64 * u) as usize).min(len - 1);
        buf.swap(pivot_idx, hi - 1);
        let pivot = buf[hi - 1];

        // One comparison per non-pivot element in the sublist: len - 1.
        let mut store = lo;
        for i in lo..hi - 1 {
            comparisons += 1;
            if buf[i] == pivot {
                return Err(Error::DuplicateElements { value: pivot });
            }
            if buf[i] < pivot {
                buf.swap(i, store);
                store += 1;
            }
        }
        buf.swap(store, hi - 1);

        if store == target {
            return Ok(ArraySelection {
                comparisons,
                selected: Some(buf[store]),
            });
        } else if target < store {
            hi = store;
        } else {
            lo = store + 1;
        }
    }
}

/// Draw one comparison count from the pivot-fraction recursion, consuming
/// one uniform per level from `next_u`.
pub(crate) fn count_recursion_with(
    n: usize,
    m: usize,
    mut next_u: impl FnMut() -> f64,
) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    let mut n = n as u64;
    let mut m = m as u64;
    let mut count = 0u64;
    // Invariant: each level strictly decreases the active size.
    while n >= m {
        count += n - 1;
        let u = next_u();
        let v = ((n as f64 * u) as u64).min(n - 1);
        if v >= m {
            n = v;
        } else if v == m - 1 {
            break;
        } else {
            n = n - 1 - v;
            m = m - 1 - v;
        }
    }
    Ok(count)
}

/// One draw of `C_{n,m}` via the size recursion. Returns 0 whenever
/// `n <= m-1`, matching the boundary convention.
pub fn sample_count_recursion(n: usize, m: usize, stream: &mut RandomStream) -> Result<u64> {
    count_recursion_with(n, m, || stream.next_uniform())
}
