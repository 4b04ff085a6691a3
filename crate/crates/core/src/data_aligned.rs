//! Data-aligned bin estimator.
//!
//! Every boundary is a value that actually occurred in the stream. A new datum
//! opens a temporary extra bin ending at its value; the bin count is then
//! restored by merging the one neighbouring pair whose merge leaves the
//! histogram with the highest entropy.

use crate::error::{Error, Result};
use crate::estimator::QuantileEstimator;
use crate::histogram::{entropy, lower_bound_below, CountedHistogram, Quantile};
use crate::oracle::weighted_sorted_quantile;

#[inline]
fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Adds the temporary bin for `d`, growing the histogram by one bin and its
/// mass by exactly one.
///
/// Above the top boundary the new bin is appended with count 1. Otherwise, for
/// `d` in bin `j` at fraction `theta` of its width, the new bin takes
/// `c[j] * theta + 1` and bin `j` keeps `c[j] * (1 - theta)`.
pub fn insert_temporary(hist: &mut CountedHistogram, d: f64) -> Result<()> {
    if !d.is_finite() {
        return Err(Error::NonFinite(d));
    }
    if hist.is_empty() {
        if d <= hist.lower_bound() {
            hist.set_lower_bound(lower_bound_below(d));
        }
        hist.push_bin(d, 1.0);
        return Ok(());
    }
    if d <= hist.lower_bound() {
        hist.set_lower_bound(lower_bound_below(d));
    }
    let j = hist.boundaries().partition_point(|&b| b < d);
    if j == hist.len() {
        hist.push_bin(d, 1.0);
        return Ok(());
    }
    let upper = hist.boundaries()[j];
    if upper == d {
        return Err(Error::InvalidHistogram("datum coincides with a boundary"));
    }
    let lo = hist.bin_lower(j);
    let theta = (d - lo) / (upper - lo);
    let c = hist.counts()[j];
    hist.counts_mut()[j] = c * (1.0 - theta);
    hist.insert_bin(j, d, c * theta + 1.0);
    Ok(())
}

/// Index `k` (0-based) such that merging bins `k` and `k + 1` maximises the
/// entropy of the result. Ties go to the smallest `k`.
///
/// The total mass is unchanged by any merge, so maximising entropy is the same
/// as minimising the growth of `sum c ln c`, which only involves the two bins
/// being merged.
pub fn best_merge(counts: &[f64]) -> Result<usize> {
    if counts.len() < 2 {
        return Err(Error::InvalidHistogram("need at least two bins to merge"));
    }
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    let mut left = x_ln_x(counts[0]);
    for k in 0..counts.len() - 1 {
        let right = x_ln_x(counts[k + 1]);
        let cost = x_ln_x(counts[k] + counts[k + 1]) - (left + right);
        if cost < best_cost {
            best_cost = cost;
            best = k;
        }
        left = right;
    }
    Ok(best)
}

/// Reference for [`best_merge`]: evaluates the full entropy of every
/// candidate merge. Quadratic in the number of bins.
pub fn best_merge_exhaustive(counts: &[f64]) -> Result<usize> {
    if counts.len() < 2 {
        return Err(Error::InvalidHistogram("need at least two bins to merge"));
    }
    let mut best = 0;
    let mut best_h = f64::NEG_INFINITY;
    let mut merged = Vec::with_capacity(counts.len() - 1);
    for k in 0..counts.len() - 1 {
        merged.clear();
        merged.extend_from_slice(&counts[..k]);
        merged.push(counts[k] + counts[k + 1]);
        merged.extend_from_slice(&counts[k + 2..]);
        let h = entropy(&merged)?;
        // Candidates equal up to summation-order rounding count as ties.
        if k == 0 || h > best_h + 1e-12 * best_h.abs().max(1.0) {
            best_h = h;
            best = k;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct DataAlignedEstimator {
    capacity: usize,
    hist: CountedHistogram,
    count: u64,
    merged_once: bool,
}

impl DataAlignedEstimator {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("bin budget must be positive".into()));
        }
        Ok(DataAlignedEstimator {
            capacity,
            hist: CountedHistogram::empty(0.0),
            count: 0,
            merged_once: false,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Current bins, for inspection and bin-evolution traces.
    pub fn histogram(&self) -> &CountedHistogram {
        &self.hist
    }

    /// True until the first merge. While in warm-up every distinct value
    /// is a boundary and every count is a whole number.
    pub fn in_warmup(&self) -> bool {
        !self.merged_once
    }
}

impl QuantileEstimator for DataAlignedEstimator {
    fn observe(&mut self, d: f64) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::NonFinite(d));
        }
        self.count += 1;
        let j = self.hist.boundaries().partition_point(|&b| b < d);
        if j < self.hist.len() && self.hist.boundaries()[j] == d {
            self.hist.counts_mut()[j] += 1.0;
            return Ok(());
        }
        if self.hist.len() < self.capacity {
            if d <= self.hist.lower_bound() {
                self.hist.set_lower_bound(lower_bound_below(d));
            }
            self.hist.insert_bin(j, d, 1.0);
            return Ok(());
        }
        insert_temporary(&mut self.hist, d)?;
        let k = best_merge(self.hist.counts())?;
        self.hist.merge_pair(k)?;
        self.merged_once = true;
        Ok(())
    }

    fn estimate(&self, q: Quantile) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::Empty);
        }
        if self.in_warmup() {
            weighted_sorted_quantile(self.hist.boundaries(), self.hist.counts(), q)
        } else {
            self.hist.quantile(q)
        }
    }

    fn name(&self) -> String {
        format!("data-aligned({})", self.capacity)
    }

    fn memory_footprint(&self) -> usize {
        self.capacity
    }

    fn count(&self) -> u64 {
        self.count
    }
}
