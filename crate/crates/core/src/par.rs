//! Deterministic block-parallel map/reduce.
//!
//! Work is cut into fixed-size blocks independent of the thread count and block
//! results are combined in index order, so parallel and sequential runs agree bit for bit.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Route every kernel through the sequential path at runtime.
pub fn set_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

fn blocks(len: usize, block: usize) -> Vec<Range<usize>> {
    let block = block.max(1);
    (0..len.div_ceil(block)).map(|b| b * block..((b + 1) * block).min(len)).collect()
}

pub fn map_blocks<T, F>(len: usize, block: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = blocks(len, block);
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return ranges.into_par_iter().map(f).collect();
        }
    }
    ranges.into_iter().map(f).collect()
}

pub fn sum_blocks<F>(len: usize, block: usize, f: F) -> f64
where
    F: Fn(Range<usize>) -> f64 + Sync + Send,
{
    map_blocks(len, block, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_range_in_order() {
        let got = map_blocks(10, 3, |r| r.clone().collect::<Vec<_>>());
        assert_eq!(got, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8], vec![9]]);
        assert!(map_blocks(0, 4, |r| r.len()).is_empty());
    }

    #[test]
    fn sequential_switch_is_bitwise_identical() {
        let f = |r: Range<usize>| r.map(|i| (i as f64).sqrt().sin()).sum::<f64>();
        let a = sum_blocks(100_003, 257, f);
        set_sequential(true);
        let b = sum_blocks(100_003, 257, f);
        set_sequential(false);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
