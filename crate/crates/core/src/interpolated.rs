//! Equiprobable-bin estimator.
//!
//! After warm-up the estimator keeps `n` boundaries that split the observed
//! data into bins of equal mass. Each new datum adds a unit point mass to the
//! piecewise-linear CDF of the current histogram, and every boundary is then
//! moved to where the updated CDF crosses its level `j * (i + 1) / n`.
//!
//! Until more than `n` distinct values have been seen, every distinct value is
//! the upper boundary of its own bin and quantiles are exact.

use crate::error::{Error, Result};
use crate::estimator::QuantileEstimator;
use crate::histogram::{lower_bound_below, CountedHistogram, EquiprobableHistogram, Quantile};
use crate::oracle::weighted_sorted_quantile;

#[derive(Debug, Clone)]
enum State {
    /// Distinct values seen so far, with multiplicities.
    Warmup(CountedHistogram),
    Steady(EquiprobableHistogram),
}

#[derive(Debug, Clone)]
pub struct InterpolatedEstimator {
    capacity: usize,
    state: State,
    count: u64,
}

impl InterpolatedEstimator {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("bin budget must be positive".into()));
        }
        Ok(InterpolatedEstimator {
            capacity,
            state: State::Warmup(CountedHistogram::empty(0.0)),
            count: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn in_warmup(&self) -> bool {
        matches!(self.state, State::Warmup(_))
    }

    pub fn lower_bound(&self) -> f64 {
        match &self.state {
            State::Warmup(h) => h.lower_bound(),
            State::Steady(h) => h.lower_bound(),
        }
    }

    pub fn boundaries(&self) -> &[f64] {
        match &self.state {
            State::Warmup(h) => h.boundaries(),
            State::Steady(h) => h.boundaries(),
        }
    }

    /// The equiprobable histogram, once warm-up is over.
    pub fn histogram(&self) -> Option<&EquiprobableHistogram> {
        match &self.state {
            State::Warmup(_) => None,
            State::Steady(h) => Some(h),
        }
    }

    fn observe_warmup(&mut self, d: f64) -> Result<()> {
        let State::Warmup(h) = &mut self.state else {
            unreachable!()
        };
        if d <= h.lower_bound() {
            h.set_lower_bound(lower_bound_below(d));
        }
        let j = h.boundaries().partition_point(|&b| b < d);
        if j < h.len() && h.boundaries()[j] == d {
            h.counts_mut()[j] += 1.0;
            return Ok(());
        }
        if h.len() < self.capacity {
            h.insert_bin(j, d, 1.0);
            return Ok(());
        }

        // One distinct value too many: spread the warm-up mass over n
        // equiprobable bins, then absorb `d` as a steady-phase update.
        let n = self.capacity;
        let mut bounds = Vec::with_capacity(n);
        for k in 1..n {
            bounds.push(h.quantile(Quantile::new(k as f64 / n as f64)?)?);
        }
        bounds.push(*h.boundaries().last().unwrap());
        let lower = h.lower_bound();
        make_strictly_increasing(lower, &mut bounds);
        let total = h.total().round() as u64;
        let hist = EquiprobableHistogram::new(lower, bounds, total)?;
        self.state = State::Steady(hist);
        self.observe_steady(d);
        Ok(())
    }

    fn observe_steady(&mut self, d: f64) {
        let State::Steady(h) = &mut self.state else {
            unreachable!()
        };
        let n = h.len();
        let i = h.total_count() as f64;
        let mut lower = h.lower_bound();
        if d <= lower {
            lower = lower_bound_below(d);
            let bounds = h.boundaries().to_vec();
            h.replace(lower, bounds, h.total_count());
        }

        // Mass units: the current CDF is M(v) = position(v) * i / n, the
        // updated one is M(v) + [v >= d], and bin j ends at mass j(i+1)/n.
        let per_bin = i / n as f64;
        let mass_at_d = h.position_of(d) * per_bin;
        let mut bounds = Vec::with_capacity(n);
        for j in 1..n {
            let level = j as f64 * (i + 1.0) / n as f64;
            let b = if level <= mass_at_d {
                h.value_at_position(level / per_bin)
            } else if level <= mass_at_d + 1.0 {
                d
            } else {
                h.value_at_position((level - 1.0) / per_bin)
            };
            bounds.push(b);
        }
        bounds.push(h.boundaries()[n - 1].max(d));
        make_strictly_increasing(lower, &mut bounds);
        h.replace(lower, bounds, h.total_count() + 1);
    }
}

/// Nudges boundaries apart by single ulps where rounding made neighbours
/// collide. The last boundary is kept fixed.
fn make_strictly_increasing(lower: f64, bounds: &mut [f64]) {
    let n = bounds.len();
    let mut prev = lower;
    for b in bounds[..n - 1].iter_mut() {
        if *b <= prev {
            *b = prev.next_up();
        }
        prev = *b;
    }
    for j in (0..n - 1).rev() {
        if bounds[j] >= bounds[j + 1] {
            bounds[j] = bounds[j + 1].next_down();
        }
    }
    debug_assert!(lower < bounds[0]);
}

impl QuantileEstimator for InterpolatedEstimator {
    fn observe(&mut self, d: f64) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::NonFinite(d));
        }
        match self.state {
            State::Warmup(_) => self.observe_warmup(d)?,
            State::Steady(_) => self.observe_steady(d),
        }
        self.count += 1;
        Ok(())
    }

    fn estimate(&self, q: Quantile) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::Empty);
        }
        match &self.state {
            State::Warmup(h) => weighted_sorted_quantile(h.boundaries(), h.counts(), q),
            State::Steady(h) => h.quantile(q),
        }
    }

    fn name(&self) -> String {
        format!("interpolated({})", self.capacity)
    }

    fn memory_footprint(&self) -> usize {
        self.capacity
    }

    fn count(&self) -> u64 {
        self.count
    }
}
