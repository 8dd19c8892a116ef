use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("schema error: {0}")]
    Schema(String),

    /// A per-frame validation failure, located by frame index and field path.
    #[error("frame {frame}: {field}: {message}")]
    Frame { frame: usize, field: String, message: String },

    #[error("token {index} ({word:?}) starts at {start}s, past the final frame at {last}s")]
    Alignment { index: usize, word: String, start: f64, last: f64 },

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unknown object {0:?}")]
    UnknownObject(String),

    #[error("unknown subject {0:?}")]
    UnknownSubject(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
