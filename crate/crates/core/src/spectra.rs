//! Frequency-domain quantities: tap frequency responses, input/output
//! spectral densities, the integrands entering the rate and exponent
//! formulas, and the periodic quadrature rule they are all fed through.
//!
//! Everything here is a pure function of its arguments. Complex arithmetic
//! is internal; quantities documented as real are returned as `f64`.

use num_complex::Complex64;

use crate::{Error, Result};

/// Values below this are treated as "log of zero" and signal infeasibility
/// instead of producing -inf.
pub const LOG_FLOOR: f64 = 1e-300;

/// A real FIR tap sequence indexed from 0.
///
/// Holds the true channel taps, the mismatched decoder taps, and (with a
/// leading zero) AR coefficient sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TapVector {
    coeffs: Vec<f64>,
}

impl TapVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("tap vector must be non-empty".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("tap vector has non-finite entries".into()));
        }
        Ok(TapVector { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest tap index (channel memory K).
    pub fn memory(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coeffs)
    }
}

pub fn norm_sq(taps: &[f64]) -> f64 {
    taps.iter().map(|t| t * t).sum()
}

/// Lag-`m` tap autocorrelation `sum_k taps[k] * taps[k+m]`.
///
/// Zero for `m` past the tap memory.
pub fn lag_product(taps: &[f64], m: usize) -> f64 {
    if m >= taps.len() {
        return 0.0;
    }
    (0..taps.len() - m).map(|k| taps[k] * taps[k + m]).sum()
}

/// Frequency response `sum_k taps[k] e^{-jk nu}` of a tap sequence.
///
/// AR coefficient sequences are passed with their leading zero so the sum
/// effectively starts at k = 1.
pub fn freq_response(taps: &[f64], nu: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &t) in taps.iter().enumerate() {
        acc += t * Complex64::from_polar(1.0, -(k as f64) * nu);
    }
    acc
}

/// `|1 - Phi(nu)|^2` for AR coefficients `phi[1..=p]` (no leading zero).
pub fn ar_denominator_sq(phi: &[f64], nu: f64) -> f64 {
    let mut re = 1.0;
    let mut im = 0.0;
    for (i, &c) in phi.iter().enumerate() {
        let k = (i + 1) as f64;
        re -= c * (k * nu).cos();
        im += c * (k * nu).sin();
    }
    re * re + im * im
}

/// Input and output power spectral densities of the AR-shaped input driven
/// through the ISI channel.
///
/// `S_X(nu) = eta^2 / |1 - Phi(nu)|^2`, `S_Y(nu) = |H(nu)|^2 S_X(nu) + sigma^2`.
#[derive(Debug, Clone)]
pub struct SpectralDensities {
    h: Vec<f64>,
    phi: Vec<f64>,
    eta2: f64,
    sigma2: f64,
}

impl SpectralDensities {
    pub fn new(h: &TapVector, sigma2: f64, eta2: f64, phi: &[f64]) -> Result<Self> {
        if sigma2 <= 0.0 || !sigma2.is_finite() {
            return Err(Error::InvalidInput(format!("sigma2 must be positive, got {sigma2}")));
        }
        if eta2 <= 0.0 || !eta2.is_finite() {
            return Err(Error::InvalidInput(format!("eta2 must be positive, got {eta2}")));
        }
        crate::armodel::require_stable(phi)?;
        Ok(SpectralDensities {
            h: h.coeffs().to_vec(),
            phi: phi.to_vec(),
            eta2,
            sigma2,
        })
    }

    pub fn s_x(&self, nu: f64) -> f64 {
        self.eta2 / ar_denominator_sq(&self.phi, nu)
    }

    pub fn s_y(&self, nu: f64) -> f64 {
        freq_response(&self.h, nu).norm_sqr() * self.s_x(nu) + self.sigma2
    }
}

/// Integrand of the AR-ensemble rate bound:
/// `(omega/2)|A|^2 + |1 - Phi|^2 / (2 eta^2)`.
///
/// Strictly positive for stable `phi` and `omega >= 0`.
pub fn integrand_f(omega: f64, alpha: &[f64], phi: &[f64], eta2: f64, nu: f64) -> f64 {
    let a2 = freq_response(alpha, nu).norm_sqr();
    omega / 2.0 * a2 + ar_denominator_sq(phi, nu) / (2.0 * eta2)
}

/// Integrand of the fixed-composition rate bound:
/// `sum_{k<=p} omega_k cos(k nu) + omega_{p+1} sum_{k>min(p,K)} Pi_k(alpha) cos(k nu)`.
///
/// `omega` has p+2 components. Positive on [0, 2pi] for `omega` in the
/// diagonally dominant cone; non-positive values are the caller's
/// infeasibility signal.
pub fn integrand_g(omega: &[f64], alpha: &[f64], p: usize, nu: f64) -> f64 {
    debug_assert_eq!(omega.len(), p + 2);
    let big_k = alpha.len() - 1;
    let mut g = 0.0;
    for (k, &w) in omega.iter().take(p + 1).enumerate() {
        g += w * (k as f64 * nu).cos();
    }
    let w_last = omega[p + 1];
    for k in (1 + p.min(big_k))..=big_k {
        g += w_last * lag_product(alpha, k) * (k as f64 * nu).cos();
    }
    g
}

/// Integrand of the exponent dual problem: the determinant symbol of the
/// tilted channel Gaussian,
/// `(1/(2 sigma^2) + w2) (w0 + [||h||^2/2 + sum_{k>=1} Pi_k(h) cos(k nu)]/sigma^2)
///  - |w1 - (h0 + sum_{k>=1} h_k e^{-jk nu})/sigma^2|^2 / 4`.
///
/// The tilted integral converges exactly when this is positive (together
/// with `1/(2 sigma^2) + w2 > 0`), which defines the dual feasible set.
pub fn integrand_u(omega_hat: [f64; 3], h: &[f64], sigma2: f64, nu: f64) -> f64 {
    let [w0, w1, w2] = omega_hat;
    let lambda = 1.0 / (2.0 * sigma2) + w2;
    let mut response = Complex64::new(h[0], 0.0);
    for (k, &hk) in h.iter().enumerate().skip(1) {
        response += hk * Complex64::from_polar(1.0, -(k as f64) * nu);
    }
    let cross = (Complex64::new(w1, 0.0) - response / sigma2).norm_sqr() / 4.0;
    let mut bracket = norm_sq(h) / 2.0;
    for k in 1..h.len() {
        bracket += lag_product(h, k) * (k as f64 * nu).cos();
    }
    lambda * (w0 + bracket / sigma2) - cross
}

/// Normalized integral `(1/2pi) \int_0^{2pi} f(nu) dnu` by the trapezoidal
/// rule on the uniform periodic grid (spectrally accurate for smooth
/// 2pi-periodic integrands).
pub fn integrate_periodic(f: impl Fn(f64) -> f64, n_points: usize) -> Result<f64> {
    if n_points < 8 || !n_points.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "quadrature grid must be a power of two >= 8, got {n_points}"
        )));
    }
    let step = 2.0 * std::f64::consts::PI / n_points as f64;
    let mut acc = 0.0;
    for i in 0..n_points {
        let nu = i as f64 * step;
        let v = f(nu);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { nu });
        }
        acc += v;
    }
    Ok(acc / n_points as f64)
}

/// Uniform periodic grid used by the precomputed-profile evaluators.
pub fn grid(n_points: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 * std::f64::consts::PI / n_points as f64;
    (0..n_points).map(move |i| i as f64 * step)
}

/// Mean of precomputed samples on the periodic grid; same normalization as
/// [`integrate_periodic`].
pub fn grid_mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}
