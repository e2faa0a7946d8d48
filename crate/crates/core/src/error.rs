use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: unknown word '{word}'")]
    Vocabulary { line: u64, word: String },

    #[error("line {line}: score {score} outside 0..={max}")]
    ScoreRange { line: u64, score: i64, max: u8 },

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("session {participant}: {message}")]
    Protocol { participant: String, message: String },

    #[error("{0}")]
    Empty(String),

    #[error("{count} ordered pairs have no responses (first: {first})")]
    MissingPairs { count: usize, first: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("zero expected count in category {0}")]
    ZeroExpected(usize),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}
