use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite datum: {0}")]
    NonFinite(f64),

    #[error("quantile fraction must lie strictly inside (0, 1), got {0}")]
    InvalidQuantile(f64),

    #[error("estimator tracks the {tracked}-quantile only, {requested} was requested")]
    UnsupportedQuantile { requested: f64, tracked: f64 },

    #[error("no data observed yet")]
    Empty,

    #[error("entropy is undefined for an empty or all-zero histogram")]
    ZeroMass,

    #[error("bin index {index} out of range for {bins} bins")]
    IndexOutOfRange { index: usize, bins: usize },

    #[error("invalid histogram: {0}")]
    InvalidHistogram(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: stream file contains no values")]
    EmptyStream(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
