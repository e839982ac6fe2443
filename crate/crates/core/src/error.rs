use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("infeasible split: n = {n} gives n1 = {n1}, n2 = {n2} (each half needs at least 2)")]
    InfeasibleSplit { n: usize, n1: usize, n2: usize },

    #[error("projected sample is constant and nonzero; the t-statistic is undefined")]
    ConstantProjection,

    #[error("zero-variance data: {0}")]
    ZeroVariance(String),

    #[error("solver diverged after {iterations} iterations")]
    Divergence { iterations: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("level alpha = {alpha} is not tabulated; supply an explicit critical value")]
    UnsupportedLevel { alpha: f64 },

    #[error("m = {m} lies outside the tabulated range 2..=10000")]
    UntabulatedM { m: usize },

    #[error("{failed} of {reps} replications failed (limit 5%): {last}")]
    TooManyFailures {
        failed: usize,
        reps: usize,
        last: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
