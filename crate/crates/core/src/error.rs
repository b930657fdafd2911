use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed generator spec `{0}`: expected `1,<ff>/<fb>` with octal digits")]
    MalformedGenerator(String),
    #[error("feedback polynomial {0:o} has no constant term; the recursion is not realizable")]
    NonRecursiveFeedback(u32),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("block length {got} exceeds the exhaustive enumeration limit {max}")]
    TooLarge { got: usize, max: usize },
    #[error("enumerator has no weight-{w} row within truncation (j_max = {j_max}); increase j_max")]
    EmptyRow { w: usize, j_max: usize },
    #[error("weight {w} is outside the enumerator (w_max = {w_max})")]
    WeightOutOfRange { w: usize, w_max: usize },
    #[error("enumerator kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: &'static str, found: &'static str },
    #[error("child rate {child} must exceed parent rate {parent}")]
    RateOrder { child: f64, parent: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid puncturing pattern: {0}")]
    InvalidPattern(String),
    #[error("non-finite LLR at position {0}")]
    NonFinite(usize),
    #[error("mutual information {0} has no finite inverse")]
    InverseUnbounded(f64),
    #[error("transfer curves are sampled on different I_A grids")]
    GridMismatch,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
