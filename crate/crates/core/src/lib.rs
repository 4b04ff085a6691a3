//! Streaming quantile estimation in bounded memory with maximum-entropy
//! histograms.
//!
//! Two estimators keep a fixed number of bins and adjust them after every
//! datum so that the histogram of everything seen so far has (close to)
//! maximal entropy:
//!
//! * [`InterpolatedEstimator`] keeps equiprobable bins, re-interpolating all
//!   boundaries after each datum.
//! * [`DataAlignedEstimator`] only ever places boundaries at observed values,
//!   adding one bin per datum and merging the neighbouring pair whose merge
//!   loses the least entropy.
//!
//! Both are exact until the stream has produced more distinct values than
//! there are bins. The crate also carries the usual comparison methods
//! ([`baselines`]), an exact [`oracle`], synthetic stream generators
//! ([`datagen`]) and an evaluation [`harness`].
//!
//! ```
//! use mehist::{DataAlignedEstimator, Quantile, QuantileEstimator};
//!
//! let mut est = DataAlignedEstimator::new(100)?;
//! for i in 0..10_000 {
//!     est.observe((i % 997) as f64)?;
//! }
//! let p95 = est.estimate(Quantile::new(0.95)?)?;
//! assert!((p95 - 947.0).abs() < 10.0);
//! # Ok::<(), mehist::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data_aligned;
pub mod datagen;
mod error;
mod estimator;
pub mod harness;
pub mod histogram;
pub mod interpolated;
pub mod oracle;

pub use baselines::{P2Estimator, ReservoirEstimator, UniformHistEstimator};
pub use data_aligned::DataAlignedEstimator;
pub use datagen::StreamSpec;
pub use error::{Error, Result};
pub use estimator::QuantileEstimator;
pub use harness::{EstimatorSpec, EvalSeries, RunConfig, Summary};
pub use histogram::{entropy, CountedHistogram, EquiprobableHistogram, Quantile};
pub use interpolated::InterpolatedEstimator;
pub use oracle::ExactQuantileStore;
