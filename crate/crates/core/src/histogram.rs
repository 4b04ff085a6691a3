//! Histogram representations shared by the estimators.
//!
//! Bins are right-closed: bin `j` covers `(b[j-1], b[j]]`, where `b[-1]` is the
//! histogram's lower bound. The density inside a bin is taken as uniform, so
//! every quantile query is an inversion of a piecewise-linear CDF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target fraction of a quantile query, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Quantile(f64);

impl Quantile {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Quantile(q))
        } else {
            Err(Error::InvalidQuantile(q))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Quantile {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Quantile::new(q)
    }
}

impl From<Quantile> for f64 {
    fn from(q: Quantile) -> f64 {
        q.0
    }
}

impl std::fmt::Display for Quantile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Shannon entropy, in bits, of the distribution given by normalising `counts`.
///
/// Zero counts contribute nothing (`0 * log2(0) = 0`).
pub fn entropy(counts: &[f64]) -> Result<f64> {
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let h = -counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            p * p.log2()
        })
        .sum::<f64>();
    // Rounding can leave a single-bin histogram at -0.0.
    Ok(h.max(0.0))
}

/// A value strictly below `d`, used when a datum falls at or under the current
/// lower bound of a histogram.
pub(crate) fn lower_bound_below(d: f64) -> f64 {
    d - d.abs().max(1.0) * 4.0 * f64::EPSILON
}

/// Histogram with explicit, real-valued per-bin counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountedHistogram {
    lower: f64,
    boundaries: Vec<f64>,
    counts: Vec<f64>,
}

impl CountedHistogram {
    pub fn new(lower: f64, boundaries: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if boundaries.len() != counts.len() {
            return Err(Error::InvalidHistogram(
                "boundaries and counts differ in length",
            ));
        }
        if boundaries.is_empty() {
            return Err(Error::InvalidHistogram("histogram has no bins"));
        }
        if !lower.is_finite() || boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidHistogram("non-finite boundary"));
        }
        if lower >= boundaries[0] || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidHistogram(
                "boundaries are not strictly increasing",
            ));
        }
        if counts.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidHistogram("negative or non-finite count"));
        }
        Ok(CountedHistogram {
            lower,
            boundaries,
            counts,
        })
    }

    /// An empty histogram (no bins yet) with the given lower bound.
    pub(crate) fn empty(lower: f64) -> Self {
        CountedHistogram {
            lower,
            boundaries: Vec::new(),
            counts: Vec::new(),
        }
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Total mass, summed left to right.
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Lower edge of bin `j`.
    #[inline]
    pub fn bin_lower(&self, j: usize) -> f64 {
        if j == 0 {
            self.lower
        } else {
            self.boundaries[j - 1]
        }
    }

    /// Index of the bin `(b[j-1], b[j]]` containing `d`, or `None` when `d`
    /// lies outside `(lower, b[n-1]]`.
    pub fn bin_of(&self, d: f64) -> Option<usize> {
        if d <= self.lower {
            return None;
        }
        let j = self.boundaries.partition_point(|&b| b < d);
        (j < self.boundaries.len()).then_some(j)
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy(&self.counts)
    }

    /// Value below which a fraction `q` of the mass lies, interpolating
    /// linearly inside the bin where the cumulative mass crosses `q * total`.
    pub fn quantile(&self, q: Quantile) -> Result<f64> {
        let total = self.total();
        if self.is_empty() || !(total > 0.0) {
            return Err(Error::Empty);
        }
        let target = q.value() * total;
        let mut cum = 0.0;
        for (j, (&upper, &c)) in self.boundaries.iter().zip(&self.counts).enumerate() {
            if c > 0.0 && cum + c >= target {
                let lo = self.bin_lower(j);
                let frac = ((target - cum) / c).clamp(0.0, 1.0);
                return Ok(lo + frac * (upper - lo));
            }
            cum += c;
        }
        // Only reachable when rounding leaves `cum` a hair below `target`.
        Ok(*self.boundaries.last().unwrap())
    }

    /// Copy of this histogram with bins `k` and `k + 1` (0-based) merged into
    /// one bin with upper boundary `b[k+1]` and count `c[k] + c[k+1]`.
    pub fn merged(&self, k: usize) -> Result<CountedHistogram> {
        let mut h = self.clone();
        h.merge_pair(k)?;
        Ok(h)
    }

    /// In-place form of [`merged`](Self::merged).
    pub fn merge_pair(&mut self, k: usize) -> Result<()> {
        if k + 1 >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                bins: self.len(),
            });
        }
        self.counts[k + 1] += self.counts[k];
        self.counts.remove(k);
        self.boundaries.remove(k);
        Ok(())
    }

    pub(crate) fn set_lower_bound(&mut self, lower: f64) {
        debug_assert!(self.boundaries.first().is_none_or(|&b| lower < b));
        self.lower = lower;
    }

    pub(crate) fn insert_bin(&mut self, j: usize, boundary: f64, count: f64) {
        self.boundaries.insert(j, boundary);
        self.counts.insert(j, count);
    }

    pub(crate) fn push_bin(&mut self, boundary: f64, count: f64) {
        self.boundaries.push(boundary);
        self.counts.push(count);
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [f64] {
        &mut self.counts
    }
}

/// Histogram whose bins each hold the same share of the observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct EquiprobableHistogram {
    lower: f64,
    boundaries: Vec<f64>,
    total_count: u64,
}

impl EquiprobableHistogram {
    pub fn new(lower: f64, boundaries: Vec<f64>, total_count: u64) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::InvalidHistogram("histogram has no bins"));
        }
        if !lower.is_finite() || boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidHistogram("non-finite boundary"));
        }
        if lower >= boundaries[0] || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidHistogram(
                "boundaries are not strictly increasing",
            ));
        }
        Ok(EquiprobableHistogram {
            lower,
            boundaries,
            total_count,
        })
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Mass held by each bin.
    pub fn bin_mass(&self) -> f64 {
        self.total_count as f64 / self.len() as f64
    }

    #[inline]
    fn bin_lower(&self, j: usize) -> f64 {
        if j == 0 {
            self.lower
        } else {
            self.boundaries[j - 1]
        }
    }

    /// CDF expressed in bin units: `(j - 1) + theta` for a value `theta` of
    /// the way through bin `j` (1-based), clamped to `[0, n]`.
    pub fn position_of(&self, v: f64) -> f64 {
        if v <= self.lower {
            return 0.0;
        }
        let n = self.len();
        let j = self.boundaries.partition_point(|&b| b < v);
        if j >= n {
            return n as f64;
        }
        let lo = self.bin_lower(j);
        let hi = self.boundaries[j];
        j as f64 + (v - lo) / (hi - lo)
    }

    /// Inverse of [`position_of`](Self::position_of) for `u` in `[0, n]`.
    pub fn value_at_position(&self, u: f64) -> f64 {
        let n = self.len();
        if u <= 0.0 {
            return self.lower;
        }
        // Bin j (0-based) spans positions (j, j + 1].
        let j = (u.ceil() as usize).clamp(1, n) - 1;
        let frac = (u - j as f64).clamp(0.0, 1.0);
        let lo = self.bin_lower(j);
        lo + frac * (self.boundaries[j] - lo)
    }

    /// Inverts the piecewise-linear CDF that rises from 0 at the lower bound
    /// to `j / n` at `b[j]`.
    pub fn quantile(&self, q: Quantile) -> Result<f64> {
        if self.total_count == 0 {
            return Err(Error::Empty);
        }
        Ok(self.value_at_position(q.value() * self.len() as f64))
    }

    pub(crate) fn replace(&mut self, lower: f64, boundaries: Vec<f64>, total_count: u64) {
        self.lower = lower;
        self.boundaries = boundaries;
        self.total_count = total_count;
    }
}
