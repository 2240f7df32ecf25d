use thiserror::Error;

/// Errors produced by mesh construction, assembly and the solver drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed mesh file; `line` is 1-based.
    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("mesh validation error: {0}")]
    MeshValidation(String),

    /// A user-supplied function returned a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// An operation was attempted on inconsistent internal state.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    /// The residual contract of the direct solve could not be met.
    #[error("linear solve residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    /// Fixed-point iteration for the pointwise penalty system did not
    /// converge; the per-iteration increment norms are preserved.
    #[error("Picard iteration did not converge after {0} iterations", history.len())]
    PicardNonConvergence { history: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
