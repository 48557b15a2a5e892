//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by geometry, CF/PDF machinery, sampling and capacity estimators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// MS position coincides with a base station.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Argument outside a special function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// CF-to-PDF inversion did not meet its accuracy contract.
    #[error(
        "CF inversion failure: normalization {normalization} (tolerance {tolerance}); \
         truncated at W={w_end}, tail estimate {tail_estimate:.3e}, fit residual {fit_residual:.3e}"
    )]
    InversionFailure {
        normalization: f64,
        tolerance: f64,
        w_end: f64,
        tail_estimate: f64,
        fit_residual: f64,
    },

    /// Two binned laws do not share a bin grid.
    #[error("bin grid mismatch: {0}")]
    GridMismatch(String),

    /// KL divergence is infinite: f has mass on a bin where g has none.
    #[error("infinite KL divergence: f has mass {f_mass} in bin {bin} where g has none")]
    InfiniteDivergence { bin: usize, f_mass: f64 },

    /// Division by a vanishing denominator (e.g. difference factors at i_p = 0).
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
