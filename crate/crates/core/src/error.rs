use thiserror::Error;

/// Errors produced by the pairmatch library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing price for {ticker} on {date}")]
    MissingPrice { ticker: String, date: String },

    #[error("non-positive price {price} for {ticker} on {date}")]
    NonPositivePrice { ticker: String, date: String, price: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed edge list: {0}")]
    MalformedEdges(String),

    #[error("unknown ticker {0}")]
    UnknownTicker(String),

    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
