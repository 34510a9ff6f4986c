use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called outside its contract (wrong user count, K > M, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A pilot query would push consumption past the budget cap.
    #[error("pilot budget exceeded: requested {requested} symbols with {consumed} of {cap} consumed")]
    BudgetExceeded {
        requested: usize,
        consumed: usize,
        cap: usize,
    },

    #[error("pilot matrix is rank deficient (smallest singular value {min_singular:e})")]
    SingularPilot { min_singular: f64 },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("grid with spacing {spacing} has no points inside the region")]
    GridEmpty { spacing: f64 },

    #[error("no available grid point left for antenna {antenna} after {attempts} grid origin(s)")]
    AvailableGridExhausted { antenna: usize, attempts: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for errors caused by invalid user input rather than by a failed run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse { .. })
    }
}
