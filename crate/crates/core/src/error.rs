use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A formula was evaluated outside the regime where it is defined
    /// (e.g. a subcritical closed form at A >= 1/2).
    #[error("regime mismatch: {0}")]
    Regime(String),

    /// A degree below the minimum degree m, or a quantity undefined at a degree.
    #[error("degree out of domain: {0}")]
    Domain(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
