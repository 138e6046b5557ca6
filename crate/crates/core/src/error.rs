use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state space must contain at least one label")]
    EmptyStateSpace,

    #[error("invalid state label {0:?}")]
    InvalidLabel(String),

    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),

    #[error("subject {subject}: event index {index} is outside the state space of size {size}")]
    InvalidState {
        subject: String,
        index: usize,
        size: usize,
    },

    #[error("subject {subject}: arrival time at position {position} decreases")]
    DecreasingTimes { subject: String, position: usize },

    #[error("subject {subject}: {reason}")]
    InvalidSequence { subject: String, reason: String },

    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown event labels: {}", .0.join(", "))]
    UnknownLabels(Vec<String>),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("schema mismatch: expected {expected:?}, found {found:?}")]
    Schema { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a bug or the host.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
