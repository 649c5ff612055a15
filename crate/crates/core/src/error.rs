use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },
    #[error("generators {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },
    #[error("point {0:?} lies outside the canonical chart")]
    PointOutOfChart([f64; 2]),
    #[error("selection function evaluated outside its domain: {0}")]
    SelectionOutOfDomain(String),
    #[error("could not draw a fresh point after {0} attempts")]
    ResampleExhausted(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
