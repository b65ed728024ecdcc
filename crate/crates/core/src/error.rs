use thiserror::Error;

/// Crate-wide error type. Every fallible operation narrows its failure to one
/// of these variants; contract violations that can only arise from caller bugs
/// (e.g. evaluating an integer-lattice function at a genuine half-point) are
/// reported here rather than by panicking.
#[derive(Debug, Error)]
pub enum Error {
    #[error("square root of negative value: {0}")]
    NegativeSqrt(String),

    #[error("expected a nonnegative exponent interval, got lower end {0}")]
    NegativeExponent(String),

    #[error("expected a positive value: {0}")]
    NonPositive(String),

    #[error("interval division by an interval containing zero: [{0}, {1}]")]
    DivisionByZero(String, String),

    #[error("dyadic exponent out of supported range")]
    ExponentRange,

    #[error("point ({0}, {1}) is not on the integer sublattice")]
    NonIntegerPoint(String, String),

    #[error("{0} is not a half-integer")]
    NotHalfInteger(String),

    #[error("pair factor has a pole: |x| must be strictly less than n (n = {n}, x = {x})")]
    PairFactorPole { n: u64, x: String },

    #[error("alpha must satisfy 0 <= alpha <= 1, got {0}")]
    AlphaRange(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("malformed cache file {path}: {reason}")]
    CacheFormat { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
