use thiserror::Error;

/// Errors raised by parameter validation and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("beta must lie in [0, 1], got {0}")]
    BetaOutOfRange(f64),
    #[error("beta must lie in [0, 1) for the scaling family, got {0}")]
    BetaNotBelowOne(f64),
    #[error("at least two colors are required, got {0}")]
    TooFewColors(usize),
    #[error("b and B0 have different lengths ({b} vs {b0})")]
    LengthMismatch { b: usize, b0: usize },
    #[error("fixed ball count b_{color} is negative ({value})")]
    NegativeFixedBalls { color: usize, value: f64 },
    #[error("the total of the fixed ball counts |b| must be positive")]
    ZeroFixedTotal,
    #[error("initial ball count b_{color} + B0_{color} = {value} must be positive")]
    NonPositiveInitialBalls { color: usize, value: f64 },
    #[error("point is not on the simplex: {0}")]
    OffSimplex(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("trajectory too short: {required} steps required, {available} available")]
    TrajectoryTooShort { required: u64, available: u64 },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),
    #[error("integral diverges toward the endpoint {endpoint}")]
    DivergentIntegral { endpoint: f64 },
    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfInterval { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("infeasible experiment: {0}")]
    Infeasible(String),
    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
