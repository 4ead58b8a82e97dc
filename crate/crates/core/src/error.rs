use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Numerical payloads are stored as `f64` regardless of the scalar type used
/// for the computation so the error stays `Clone + PartialEq`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite argument {0}")]
    NonFinite(f64),

    #[error("cosine integral has a logarithmic pole at x = 0")]
    CiPole,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point lies on the light cone (xi = 1); evaluate the one-sided limits at xi = 1 -/+ delta instead")]
    LightConeBoundary,

    #[error("regulator extrapolation did not converge: residual {residual:e} exceeds tolerance {tolerance:e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("perturbative state is invalid: rho22 = {0} <= 0 (coupling too strong)")]
    Validity(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
