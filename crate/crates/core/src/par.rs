//! Execution policy for the data-parallel scans.
//!
//! `Execution::Parallel` uses rayon when the `parallel` feature is enabled and
//! silently runs sequentially otherwise. Results never depend on the mode:
//! work is split into fixed contiguous index ranges and reduced in range order.

use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Splits `0..total` into at most `max_chunks` contiguous ranges.
pub fn chunk_ranges(total: u64, max_chunks: u64) -> Vec<Range<u64>> {
    if total == 0 {
        return Vec::new();
    }
    let chunks = max_chunks.clamp(1, total);
    let base = total / chunks;
    let extra = total % chunks;
    let mut out = Vec::with_capacity(chunks as usize);
    let mut start = 0;
    for k in 0..chunks {
        let len = base + u64::from(k < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Maps every range through `f` and returns the results in range order.
pub fn map_ranges<T, F>(ranges: &[Range<u64>], exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return ranges.par_iter().cloned().map(f).collect();
    }
    let _ = exec;
    ranges.iter().cloned().map(f).collect()
}

/// Parallel (or sequential) indexed map preserving order.
pub fn map_indices<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Number of chunks to split a scan into for the current thread pool.
pub fn default_chunks() -> u64 {
    #[cfg(feature = "parallel")]
    {
        (rayon::current_num_threads() as u64) * 8
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_exactly() {
        for total in [1u64, 7, 64, 1000] {
            for chunks in [1u64, 3, 8, 5000] {
                let r = chunk_ranges(total, chunks);
                assert_eq!(r.first().unwrap().start, 0);
                assert_eq!(r.last().unwrap().end, total);
                for w in r.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                }
            }
        }
        assert!(chunk_ranges(0, 4).is_empty());
    }

    #[test]
    fn modes_agree() {
        let r = chunk_ranges(100, 7);
        let a = map_ranges(&r, Execution::Sequential, |r| r.sum::<u64>());
        let b = map_ranges(&r, Execution::Parallel, |r| r.sum::<u64>());
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 4950);
    }
}
