use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("segmentation failed: {0}")]
    SegmentationFailed(String),
    #[error("optimizer failure after {n_evals} evaluations: {reason}")]
    OptimizerFailure {
        reason: String,
        best_x: Vec<f64>,
        best_f: f64,
        n_evals: usize,
    },
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the failure came from the filesystem rather than the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Wav(hound::Error::IoError(_)) => true,
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
