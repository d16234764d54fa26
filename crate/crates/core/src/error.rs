use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the range where the quantity is defined.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain of a scalar function.
    #[error("domain violation: {0}")]
    Domain(String),

    /// Hypotheses of a check are not met; nothing was asserted.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two objects built on different grids were combined.
    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("explicit step dt = {dt:e} violates the stability bound; use dt <= {suggested:e}")]
    Stability { dt: f64, suggested: f64 },

    #[error("inner solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last_iterate: Vec<f64>,
    },

    #[error("expression error at column {column}: {message}")]
    Expr { column: usize, message: String },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
