use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{skipped} line(s) failed validation in strict mode (first: line {first_line}: {first_message})")]
    StrictValidation {
        skipped: usize,
        first_line: usize,
        first_message: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid block range: start {start} > end {end}")]
    InvertedRange { start: u64, end: u64 },
    #[error("event source failed after {attempts} attempt(s): {message}")]
    Source { attempts: u32, message: String },
    #[error("storage error: {0}")]
    Storage(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("tick {0} outside [-887272, 887272]")]
    TickOutOfRange(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no liquidity at tick")]
    NoLiquidity,
    #[error("swap exceeds single-tick capacity")]
    ExceedsTickCapacity,
    #[error("no measurable impact: all {0} swap(s) uncomputable")]
    NoMeasurableImpact(usize),
    #[error("baseline profile is empty")]
    EmptyProfile,
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
