//! Shared inputs for the criterion benchmarks.

use mehist::datagen::StreamSpec;

/// Fixed mixture stream used by every benchmark.
pub fn mixture(count: usize) -> Vec<f64> {
    StreamSpec::mixture(count, 2013)
        .values()
        .expect("valid synthetic stream")
}

/// Histogram-like counts for merge-search benchmarks.
pub fn bin_counts(bins: usize) -> Vec<f64> {
    (0..bins)
        .map(|i| 1.0 + ((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 54) as f64)
        .collect()
}
