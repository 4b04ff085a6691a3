use crate::error::{Error, Result};
use crate::estimator::QuantileEstimator;
use crate::histogram::{CountedHistogram, Quantile};

/// Relative headroom above the first datum when it seeds the range.
const INITIAL_HEADROOM: f64 = 1e-9;

/// Fixed number of equidistant bins whose range is stretched by an integer
/// factor whenever a datum falls outside it (Schmeiser & Deutsch).
///
/// On a stretch by factor `m`, each run of `m` old bins folds into one new
/// bin: an old bin goes wherever its midpoint lands.
#[derive(Debug, Clone)]
pub struct UniformHistEstimator {
    origin: f64,
    width: f64,
    counts: Vec<f64>,
    seen: u64,
    fallback_span: f64,
    range_min: f64,
    range_max: f64,
}

impl UniformHistEstimator {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("bin budget must be positive".into()));
        }
        Ok(UniformHistEstimator {
            origin: 0.0,
            width: 1.0,
            counts: vec![0.0; bins],
            seen: 0,
            fallback_span: 1.0,
            range_min: f64::INFINITY,
            range_max: f64::NEG_INFINITY,
        })
    }

    /// Width of the range centred on the first datum when that datum is not
    /// positive. Defaults to 1.
    pub fn with_fallback_span(mut self, span: f64) -> Result<Self> {
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::Config(format!("invalid fallback span {span}")));
        }
        self.fallback_span = span;
        Ok(self)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn bin_width(&self) -> f64 {
        self.width
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Smallest and largest datum seen.
    pub fn data_range(&self) -> (f64, f64) {
        (self.range_min, self.range_max)
    }

    /// Upper edge of the last bin.
    pub fn top(&self) -> f64 {
        self.origin + self.counts.len() as f64 * self.width
    }

    pub fn histogram(&self) -> CountedHistogram {
        let n = self.counts.len();
        let bounds = (1..=n)
            .map(|j| self.origin + j as f64 * self.width)
            .collect();
        CountedHistogram::new(self.origin, bounds, self.counts.clone())
            .expect("equidistant bins are well formed")
    }

    fn stretch_up(&mut self, d: f64) {
        let n = self.counts.len();
        let span = n as f64 * self.width;
        let mut m = (((d - self.origin) / span).ceil() as u64).max(2);
        while self.origin + m as f64 * span < d {
            m += 1;
        }
        let m = m as usize;
        let mut folded = vec![0.0; n];
        for (j, &c) in self.counts.iter().enumerate() {
            folded[j / m] += c;
        }
        self.counts = folded;
        self.width *= m as f64;
    }

    fn stretch_down(&mut self, d: f64) {
        let n = self.counts.len();
        let top = self.top();
        let span = n as f64 * self.width;
        let mut m = (((top - d) / span).ceil() as u64).max(2);
        while top - m as f64 * span >= d {
            m += 1;
        }
        let m = m as usize;
        let mut folded = vec![0.0; n];
        for (j, &c) in self.counts.iter().enumerate() {
            folded[n - 1 - (n - 1 - j) / m] += c;
        }
        self.counts = folded;
        self.width *= m as f64;
        self.origin = top - n as f64 * self.width;
    }

    fn bin_index(&self, d: f64) -> usize {
        let n = self.counts.len();
        let j = ((d - self.origin) / self.width).ceil();
        (j.max(1.0) as usize).min(n) - 1
    }
}

impl QuantileEstimator for UniformHistEstimator {
    fn observe(&mut self, d: f64) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::NonFinite(d));
        }
        let n = self.counts.len() as f64;
        if self.seen == 0 {
            if d > 0.0 {
                self.origin = 0.0;
                self.width = d * (1.0 + INITIAL_HEADROOM) / n;
            } else {
                self.origin = d - self.fallback_span / 2.0;
                self.width = self.fallback_span / n;
            }
        } else if d > self.top() {
            self.stretch_up(d);
        } else if d <= self.origin {
            self.stretch_down(d);
        }
        let j = self.bin_index(d);
        self.counts[j] += 1.0;
        self.seen += 1;
        self.range_min = self.range_min.min(d);
        self.range_max = self.range_max.max(d);
        Ok(())
    }

    fn estimate(&self, q: Quantile) -> Result<f64> {
        if self.seen == 0 {
            return Err(Error::Empty);
        }
        self.histogram().quantile(q)
    }

    fn name(&self) -> String {
        format!("uniform({})", self.counts.len())
    }

    fn memory_footprint(&self) -> usize {
        self.counts.len()
    }

    fn count(&self) -> u64 {
        self.seen
    }
}
