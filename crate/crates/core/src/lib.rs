//! Achievable rates and error exponents for Gaussian intersymbol-interference
//! channels decoded with a mismatched metric.
//!
//! The receiver is assumed to run maximum-likelihood decoding for an ISI
//! channel whose taps differ from the true ones. This crate evaluates
//! single-letter lower bounds on the rates such a decoder can support, for
//! codebooks drawn from autoregressive and fixed-composition (type-class)
//! ensembles, together with the random-coding error exponent of the
//! memoryless-metric decoder and of the universal correlation (GLRT) decoder.
//! A small Monte Carlo simulator of the actual coding system is included for
//! cross-validation, as are independent references (water-filling capacity,
//! the i.i.d. Gaussian GMI closed form, bivariate Gaussian KL divergence).
//!
//! All rates are in nats per channel use.

pub mod armodel;
pub mod channel;
pub mod exponents;
pub mod optimize;
pub mod rates;
pub mod reference;
pub mod simulator;
pub mod spectra;

mod error;

pub use channel::{ChannelModel, DecoderMetric};
pub use error::{Error, Result};

/// Numerical knobs shared by the rate and exponent evaluators.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EvalConfig {
    /// Points on the periodic frequency grid (power of two, >= 8).
    pub quad_points: usize,
    /// Coarse grid resolution per axis for outer maximizations.
    pub outer_grid: usize,
    /// Absolute tolerance on scalar minimizer locations.
    pub scalar_tol: f64,
    /// Successive-value convergence threshold for vector minimization.
    pub vector_tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            quad_points: 4096,
            outer_grid: 41,
            scalar_tol: 1e-8,
            vector_tol: 1e-10,
        }
    }
}

/// Evaluates `f` at `0..n`, in parallel when the `parallel` feature is on.
/// Output order matches the index order either way.
pub(crate) fn run_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
