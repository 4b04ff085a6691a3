use crate::error::{Error, Result};
use crate::estimator::QuantileEstimator;
use crate::histogram::Quantile;
use crate::oracle::sorted_quantile;

const MARKERS: usize = 5;

/// Five-marker P² tracker of a single quantile (Jain & Chlamtac).
#[derive(Debug, Clone)]
pub struct P2Estimator {
    q: Quantile,
    heights: [f64; MARKERS],
    positions: [i64; MARKERS],
    desired: [f64; MARKERS],
    increments: [f64; MARKERS],
    seen: u64,
}

impl P2Estimator {
    pub fn new(q: Quantile) -> Self {
        let p = q.value();
        P2Estimator {
            q,
            heights: [0.0; MARKERS],
            positions: [1, 2, 3, 4, 5],
            desired: [1.0, 1.0 + 2.0 * p, 1.0 + 4.0 * p, 3.0 + 2.0 * p, 5.0],
            increments: [0.0, p / 2.0, p, (1.0 + p) / 2.0, 1.0],
            seen: 0,
        }
    }

    pub fn target(&self) -> Quantile {
        self.q
    }

    /// Marker heights; meaningful once five values have been seen.
    pub fn marker_heights(&self) -> &[f64] {
        &self.heights[..(self.seen as usize).min(MARKERS)]
    }

    pub fn marker_positions(&self) -> [i64; MARKERS] {
        self.positions
    }

    fn parabolic(&self, i: usize, s: f64) -> f64 {
        let (h, n) = (&self.heights, &self.positions);
        let (nm, ni, np) = (n[i - 1] as f64, n[i] as f64, n[i + 1] as f64);
        h[i] + s / (np - nm)
            * ((ni - nm + s) * (h[i + 1] - h[i]) / (np - ni)
                + (np - ni - s) * (h[i] - h[i - 1]) / (ni - nm))
    }

    fn linear(&self, i: usize, s: i64) -> f64 {
        let j = (i as i64 + s) as usize;
        self.heights[i]
            + s as f64 * (self.heights[j] - self.heights[i])
                / (self.positions[j] - self.positions[i]) as f64
    }
}

impl QuantileEstimator for P2Estimator {
    fn observe(&mut self, d: f64) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::NonFinite(d));
        }
        if self.seen < MARKERS as u64 {
            self.heights[self.seen as usize] = d;
            self.seen += 1;
            if self.seen == MARKERS as u64 {
                self.heights.sort_by(f64::total_cmp);
            }
            return Ok(());
        }
        self.seen += 1;

        let h = &mut self.heights;
        let k = if d < h[0] {
            h[0] = d;
            0
        } else if d < h[1] {
            0
        } else if d < h[2] {
            1
        } else if d < h[3] {
            2
        } else if d <= h[4] {
            3
        } else {
            h[4] = d;
            3
        };
        for p in &mut self.positions[k + 1..] {
            *p += 1;
        }
        for (want, inc) in self.desired.iter_mut().zip(&self.increments) {
            *want += inc;
        }

        for i in 1..MARKERS - 1 {
            let off = self.desired[i] - self.positions[i] as f64;
            let gap_up = self.positions[i + 1] - self.positions[i];
            let gap_down = self.positions[i - 1] - self.positions[i];
            if (off >= 1.0 && gap_up > 1) || (off <= -1.0 && gap_down < -1) {
                let s: i64 = if off >= 0.0 { 1 } else { -1 };
                let candidate = self.parabolic(i, s as f64);
                self.heights[i] =
                    if self.heights[i - 1] < candidate && candidate < self.heights[i + 1] {
                        candidate
                    } else {
                        self.linear(i, s)
                    };
                self.positions[i] += s;
            }
        }
        Ok(())
    }

    fn estimate(&self, q: Quantile) -> Result<f64> {
        if q != self.q {
            return Err(Error::UnsupportedQuantile {
                requested: q.value(),
                tracked: self.q.value(),
            });
        }
        match self.seen {
            0 => Err(Error::Empty),
            n if n < MARKERS as u64 => {
                let mut stored = self.heights[..n as usize].to_vec();
                stored.sort_by(f64::total_cmp);
                sorted_quantile(&stored, q)
            }
            _ => Ok(self.heights[2]),
        }
    }

    fn name(&self) -> String {
        "p2".to_string()
    }

    fn memory_footprint(&self) -> usize {
        MARKERS
    }

    fn count(&self) -> u64 {
        self.seen
    }
}
