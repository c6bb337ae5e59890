use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid observations: {0}")]
    InvalidObservations(String),

    /// Every state assigns zero probability to the count in this bin
    /// (0-based), given the data before it.
    #[error("zero likelihood at bin index {bin}: model cannot produce the observed count")]
    ZeroLikelihood { bin: usize },

    #[error("EM iteration {iteration} failed: {source}")]
    Em {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("instance too large for enumeration: {n_states}^{n_bins} paths exceeds {limit}")]
    TooLarge { n_states: usize, n_bins: usize, limit: u64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("timestamps out of order at index {index}: {value} < {previous}")]
    Unsorted { index: usize, previous: u64, value: u64 },

    #[error("invalid binning: {0}")]
    Binning(String),

    #[error("transition chain is not ergodic: {0}")]
    NonErgodic(String),

    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
