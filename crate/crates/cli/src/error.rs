use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: &'static str, message: String },

    #[error(transparent)]
    Compute(#[from] filmspec::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Failure = 1,
    Shortfall = 2,
    ConfigRejected = 3,
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Config { .. } => Status::ConfigRejected,
            CliError::Compute(filmspec::Error::ReliabilityShortfall { .. }) => Status::Shortfall,
            _ => Status::Failure,
        }
    }
}
