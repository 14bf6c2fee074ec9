use thiserror::Error;

/// Errors raised by constructors and evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("breakpoints are not strictly increasing at index {index}")]
    NonMonotoneBreakpoints { index: usize },
    #[error("enemy list is not symmetric: pair at index {index} has no mirror")]
    NonSymmetricEnemyList { index: usize },
    #[error("hostility weights increase at index {index}")]
    NonMonotoneWeights { index: usize },
    #[error("non-finite value in `{field}` at index {index}")]
    NonFinite { field: &'static str, index: usize },
    #[error("`{field}` must not be empty")]
    Empty { field: &'static str },
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid interval ({lo}, {hi})")]
    BadInterval { lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("compact-support piecewise affine function must vanish at its end nodes")]
    NonZeroBoundary,
    #[error("band parameter must be a positive integer, got {0}")]
    BadBand(i64),
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("intervals ({0}, {1}) and ({2}, {3}) overlap")]
    OverlappingIntervals(f64, f64, f64, f64),
    #[error("domain ({lo}, {hi}) is not contained in the definition domain of the function")]
    DomainMismatch { lo: f64, hi: f64 },
    #[error("tolerance {requested:e} not reached; achieved error estimate {achieved:e}")]
    ToleranceNotReached { requested: f64, achieved: f64 },
    #[error("step functions have infinite Sobolev energy for p = {0} > 1")]
    UnsupportedCombination(f64),
    #[error("query point {0} is a breakpoint")]
    BreakpointQuery(f64),
    #[error("sample grid is not uniformly spaced at index {index}")]
    NonUniformGrid { index: usize },

    #[error("lower bound {lo} exceeds upper bound {hi}")]
    BadBounds { lo: f64, hi: f64 },
    #[error("weights cover gaps up to {available}, but gap {needed} is required")]
    WeightsTooShort { needed: usize, available: usize },
    #[error("value {value} at index {index} is not an integer multiple of delta")]
    ValuesNotOnGrid { index: usize, value: f64 },
    #[error("arrangement of length {0} is too short")]
    TooShort(usize),
    #[error("{count} distinct permutations exceed the limit of {limit}")]
    TooManyPermutations { count: u128, limit: u128 },

    #[error("exponent p = {0} must be at least 1")]
    BadExponent(f64),
    #[error("dimension {0} is not supported")]
    BadDimension(usize),

    #[error("field is not supported by this evaluator: {0}")]
    UnsupportedField(&'static str),
    #[error("dimension {0} is not supported by the sectioning estimator")]
    UnsupportedDimension(usize),
    #[error("degenerate sampling box")]
    DegenerateBox,
}

pub type Result<T> = std::result::Result<T, Error>;
