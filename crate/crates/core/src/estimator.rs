use crate::error::Result;
use crate::histogram::Quantile;

/// Interface shared by every streaming estimator, so the harness can drive
/// them interchangeably.
pub trait QuantileEstimator {
    /// Feeds one datum. Non-finite values are rejected.
    fn observe(&mut self, d: f64) -> Result<()>;

    fn estimate(&self, q: Quantile) -> Result<f64>;

    /// Short label including the memory budget, e.g. `data-aligned(100)`.
    fn name(&self) -> String;

    /// Working memory in bins (or buffered values).
    fn memory_footprint(&self) -> usize;

    /// Number of data observed so far.
    fn count(&self) -> u64;
}

impl<T: QuantileEstimator + ?Sized> QuantileEstimator for Box<T> {
    fn observe(&mut self, d: f64) -> Result<()> {
        (**self).observe(d)
    }

    fn estimate(&self, q: Quantile) -> Result<f64> {
        (**self).estimate(q)
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn memory_footprint(&self) -> usize {
        (**self).memory_footprint()
    }

    fn count(&self) -> u64 {
        (**self).count()
    }
}
