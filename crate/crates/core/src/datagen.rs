//! Synthetic streams and stream files.
//!
//! Every generated value is a pure function of `(seed, index)`. Uniform
//! deviates come from hashing a counter with the SplitMix64 finaliser, and
//! normal deviates from the cosine branch of the Box-Muller transform, so the
//! streams can be reproduced outside this crate and generated in parallel
//! chunks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent uniform substreams drawn per datum.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Lane {
    FirstRadius = 1,
    FirstAngle = 2,
    SecondRadius = 3,
    SecondAngle = 4,
    Coin = 5,
}

/// Uniform deviate in the open interval (0, 1) for `(seed, lane, index)`.
#[inline]
fn uniform(seed: u64, lane: Lane, index: u64) -> f64 {
    let key = splitmix64(seed ^ (lane as u64).wrapping_mul(GOLDEN_GAMMA));
    let bits = splitmix64(key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn standard_normal(seed: u64, radius: Lane, angle: Lane, index: u64) -> f64 {
    let u1 = uniform(seed, radius, index);
    let u2 = uniform(seed, angle, index);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Normal distribution given by mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normal {
    pub mean: f64,
    pub variance: f64,
}

impl Normal {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) {
            return Err(Error::Config(format!(
                "normal distribution needs finite mean and positive variance, got N({mean}, {variance})"
            )));
        }
        Ok(Normal { mean, variance })
    }

    fn at(&self, z: f64) -> f64 {
        self.mean + self.variance.sqrt() * z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StreamKind {
    /// i.i.d. draws from one normal distribution.
    Stationary(Normal),
    /// Each datum comes from `first` or `second` on a fair coin flip.
    CoinMixture { first: Normal, second: Normal },
    /// One value per line of a text file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub kind: StreamKind,
    /// Number of values to generate; ignored for files.
    pub count: usize,
    pub seed: u64,
}

impl StreamSpec {
    /// `N(5, 1)` stream.
    pub fn stationary(count: usize, seed: u64) -> Self {
        StreamSpec {
            kind: StreamKind::Stationary(Normal {
                mean: 5.0,
                variance: 1.0,
            }),
            count,
            seed,
        }
    }

    /// Fair-coin mixture of `N(5, 1)` and `N(10, 4)`.
    pub fn mixture(count: usize, seed: u64) -> Self {
        StreamSpec {
            kind: StreamKind::CoinMixture {
                first: Normal {
                    mean: 5.0,
                    variance: 1.0,
                },
                second: Normal {
                    mean: 10.0,
                    variance: 4.0,
                },
            },
            count,
            seed,
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        StreamSpec {
            kind: StreamKind::File(path.into()),
            count: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            StreamKind::Stationary(n) => {
                Normal::new(n.mean, n.variance)?;
            }
            StreamKind::CoinMixture { first, second } => {
                Normal::new(first.mean, first.variance)?;
                Normal::new(second.mean, second.variance)?;
            }
            StreamKind::File(_) => return Ok(()),
        }
        if self.count == 0 {
            return Err(Error::Config("stream count must be at least 1".into()));
        }
        Ok(())
    }

    /// Materialises the whole stream.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.kind {
            StreamKind::Stationary(n) => Ok(gen_stationary(*n, self.seed, 0..self.count as u64)),
            StreamKind::CoinMixture { first, second } => Ok(gen_mixture(
                *first,
                *second,
                self.seed,
                0..self.count as u64,
            )),
            StreamKind::File(path) => read_stream(path),
        }
    }
}

/// Values `range` of the stationary stream `dist` under `seed`.
pub fn gen_stationary(dist: Normal, seed: u64, range: std::ops::Range<u64>) -> Vec<f64> {
    range
        .map(|i| {
            dist.at(standard_normal(
                seed,
                Lane::FirstRadius,
                Lane::FirstAngle,
                i,
            ))
        })
        .collect()
}

/// Outcome of the coin flip for datum `index`: true picks the first component.
pub fn mixture_coin(seed: u64, index: u64) -> bool {
    uniform(seed, Lane::Coin, index) < 0.5
}

/// Values `range` of the coin-flip mixture of `first` and `second`.
pub fn gen_mixture(
    first: Normal,
    second: Normal,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Vec<f64> {
    range
        .map(|i| {
            let y1 = first.at(standard_normal(
                seed,
                Lane::FirstRadius,
                Lane::FirstAngle,
                i,
            ));
            let y2 = second.at(standard_normal(
                seed,
                Lane::SecondRadius,
                Lane::SecondAngle,
                i,
            ));
            if mixture_coin(seed, i) {
                y1
            } else {
                y2
            }
        })
        .collect()
}

/// Reads one value per line. Blank lines and lines starting with `#` are
/// skipped.
pub fn read_stream(path: &Path) -> Result<Vec<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let v: f64 = text.parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("cannot parse {text:?} as a number: {e}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("non-finite value {text:?}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptyStream(path.to_path_buf()));
    }
    Ok(values)
}

/// Writes values one per line after an optional `#` header line. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_stream(path: &Path, header: Option<&str>, values: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    if let Some(h) = header {
        writeln!(out, "# {h}")?;
    }
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}
