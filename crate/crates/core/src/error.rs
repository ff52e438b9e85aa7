use thiserror::Error;

/// Errors produced by the analytic and simulation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// AR coefficients whose characteristic roots are not strictly inside
    /// the unit circle.
    #[error("unstable AR coefficients: {0}")]
    UnstableAr(String),

    /// Autocovariance whose Toeplitz matrix is not positive definite; the
    /// index is the order of the first failing leading minor.
    #[error("autocovariance is not positive definite (leading minor {minor})")]
    NotPositiveDefinite { minor: usize },

    /// Malformed or non-finite input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quadrature sample came out non-finite.
    #[error("non-finite integrand sample at nu = {nu}")]
    NonFiniteSample { nu: f64 },

    /// The feasible set of an optimization is empty or was never entered.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
