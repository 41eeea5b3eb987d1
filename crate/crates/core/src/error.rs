use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are coarse on purpose: callers (notably the CLI) map them onto
/// exit codes, so each one corresponds to a distinct kind of failure rather
/// than to a call site.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input (dimensions, empty lists, NaN states).
    #[error("invalid input: {0}")]
    Input(String),

    /// A decimal order has no fraction with a small enough denominator.
    #[error("no fraction with denominator <= {max_denominator} within {tolerance:e} of {value}")]
    Precision {
        value: f64,
        max_denominator: u64,
        tolerance: f64,
    },

    /// The supplied point is not an equilibrium of the vector field.
    #[error("point is not an equilibrium: max |f(x*)| = {residual:e} exceeds {tolerance:e}")]
    NotEquilibrium { residual: f64, tolerance: f64 },

    /// Lotka-Volterra parameters for which the requested object does not exist.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// An analysis the library does not cover (e.g. mixed order ranges).
    #[error("unsupported case: {0}")]
    Unsupported(String),

    /// An iterative numerical method failed to meet its contract.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
