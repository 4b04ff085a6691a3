//! Comparison methods: the P² marker tracker, a reservoir sample and a
//! histogram with equidistant, rescaled bins.

mod p2;
mod reservoir;
mod uniform;

pub use p2::P2Estimator;
pub use reservoir::ReservoirEstimator;
pub use uniform::UniformHistEstimator;
