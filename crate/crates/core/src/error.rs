use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at offset {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("not in the sphere algebra: {0}")]
    NotSphereElement(String),
    #[error("q out of range: {0} (need 0 < q < 1)")]
    InvalidQ(f64),
    #[error("truncation order {0} too small")]
    InvalidOrder(usize),
    #[error("index ({n}, {k}) outside the window of order {order}")]
    IndexOutOfWindow { n: usize, k: usize, order: usize },
    #[error("column {column} outside 0..={max}")]
    ColumnOutOfRange { column: usize, max: usize },
    #[error("operands use different model constants")]
    MismatchedConstants,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
