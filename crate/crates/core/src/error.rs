use thiserror::Error;

/// Errors raised by the disk toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re}+{im}i is not inside the open unit disk (modulus {modulus})")]
    OutsideDisk { re: f64, im: f64, modulus: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("point is within the zero guard of zero #{index}")]
    NearZero { index: usize },

    #[error("length mismatch: {left} nodes vs {right} zeros")]
    LengthMismatch { left: usize, right: usize },

    #[error("nodes are not uniformly separated")]
    NotUniformlySeparated,

    #[error("iteration did not converge after {iterations} steps (best residual {best_residual:e})")]
    NonConvergence { iterations: usize, best_residual: f64 },

    #[error("perturbation bound violated: max {max_perturbation:e} > allowed {allowed:e}")]
    ConstraintViolation { max_perturbation: f64, allowed: f64 },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("too many {what}: {count} exceeds cap {cap}")]
    Cap { what: &'static str, count: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
