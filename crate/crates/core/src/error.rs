use thiserror::Error;

/// Errors produced by the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum JcpmError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("charging energy is only defined for a symmetric junction set")]
    AsymmetricJunctions,

    #[error("capacitance matrix is singular or not positive definite (det = {det:e})")]
    SingularCapacitance { det: f64 },

    #[error("charge truncation ncut = {ncut} is too small (need at least {min})")]
    TruncationTooSmall { ncut: usize, min: usize },

    #[error("requested {requested} eigenpairs from a {dim}-dimensional space")]
    TooManyEigenpairs { requested: usize, dim: usize },

    #[error("eigendecomposition failed for a {dim}x{dim} matrix: {reason}")]
    Eigen { dim: usize, reason: String },

    #[error(
        "spectrum not converged at ncut cap {cap}: last relative change {residual:e} (tol {tol:e})"
    )]
    NotConverged { cap: usize, residual: f64, tol: f64 },

    #[error("termination energy has no interior minimum in [{lo}, {hi}] rad")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("resonance condition could not be bracketed: {0}")]
    RootBracket(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = JcpmError> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(JcpmError::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(JcpmError::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}
