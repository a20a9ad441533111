use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a probability measure: {0}")]
    NotProbability(String),

    #[error("frequency grid must be ascending, symmetric about 0 and contain 0")]
    NonSymmetricFrequencies,

    #[error("characteristic function violates {0}")]
    InvalidCharFn(String),

    #[error("lattice steps differ ({0} vs {1}); regrid explicitly first")]
    IncompatibleSteps(f64, f64),

    #[error("convolving two atomic measures needs a lattice; use AtomicMeasure::convolve")]
    NeedsLattice,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
