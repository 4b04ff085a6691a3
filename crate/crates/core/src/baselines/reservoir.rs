use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::QuantileEstimator;
use crate::histogram::Quantile;
use crate::oracle::sorted_quantile;

/// Uniform random sample of fixed size (Vitter's algorithm R).
///
/// The sample is kept sorted. Replacing a uniformly chosen slot of the sorted
/// buffer evicts a uniformly chosen member, which is all the sampling rule
/// needs, and quantile queries become a single lookup.
#[derive(Debug, Clone)]
pub struct ReservoirEstimator {
    buffer: Vec<f64>,
    capacity: usize,
    seen: u64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl ReservoirEstimator {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("reservoir size must be positive".into()));
        }
        Ok(ReservoirEstimator {
            buffer: Vec::with_capacity(capacity),
            capacity,
            seen: 0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Current sample, in ascending order.
    pub fn sample(&self) -> &[f64] {
        &self.buffer
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn insert_sorted(&mut self, d: f64) {
        let at = self.buffer.partition_point(|&x| x < d);
        self.buffer.insert(at, d);
    }
}

impl QuantileEstimator for ReservoirEstimator {
    fn observe(&mut self, d: f64) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::NonFinite(d));
        }
        self.seen += 1;
        if self.buffer.len() < self.capacity {
            self.insert_sorted(d);
            return Ok(());
        }
        let slot = self.rng.gen_range(0..self.seen);
        if slot < self.capacity as u64 {
            self.buffer.remove(slot as usize);
            self.insert_sorted(d);
        }
        Ok(())
    }

    fn estimate(&self, q: Quantile) -> Result<f64> {
        sorted_quantile(&self.buffer, q)
    }

    fn name(&self) -> String {
        format!("reservoir({})", self.capacity)
    }

    fn memory_footprint(&self) -> usize {
        self.capacity
    }

    fn count(&self) -> u64 {
        self.seen
    }
}
