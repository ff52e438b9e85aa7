//! Independent reference computations used to cross-validate the rate and
//! exponent evaluators: matched water-filling capacity, the closed-form GMI
//! of the i.i.d. Gaussian ensemble under a scaled memoryless metric, and
//! the zero-mean bivariate Gaussian KL divergence.

use serde::Serialize;

use crate::channel::ChannelModel;
use crate::spectra::{freq_response, integrate_periodic};
use crate::{Error, Result};

/// Matched capacity of the channel together with the water level that
/// attains it.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    /// Capacity in nats per channel use.
    pub capacity: f64,
    /// Water level theta of the power allocation `[theta - sigma^2/|H|^2]_+`.
    pub water_level: f64,
    pub quadrature_points: usize,
}

/// Water-filling capacity of the Gaussian ISI channel.
///
/// The level is solved by bisection until the allocated power matches the
/// constraint to 1e-12 (relative); spectral nulls are handled by the
/// positive-part clamp.
pub fn matched_capacity(channel: &ChannelModel, quad_points: usize) -> Result<CapacityResult> {
    let h = channel.h().to_vec();
    let sigma2 = channel.sigma2();
    let p_x = channel.p_x();
    let inv_snr = move |nu: f64| -> f64 {
        // May be +inf at a spectral null; the clamp below absorbs it.
        sigma2 / freq_response(&h, nu).norm_sqr()
    };
    let allocated = |theta: f64| -> Result<f64> {
        integrate_periodic(|nu| (theta - inv_snr(nu)).max(0.0), quad_points)
    };

    let mut lo = 0.0_f64;
    let mut hi = sigma2 / channel.tap_norm_sq() + p_x;
    while allocated(hi)? < p_x {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if allocated(mid)? < p_x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);

    let h = channel.h().to_vec();
    let capacity = 0.5
        * integrate_periodic(
            |nu| {
                let gain = freq_response(&h, nu).norm_sqr();
                let power = (theta - sigma2 / gain).max(0.0);
                (1.0 + power * gain / sigma2).ln()
            },
            quad_points,
        )?;
    Ok(CapacityResult { capacity, water_level: theta, quadrature_points: quad_points })
}

/// Highest rate of the i.i.d. Gaussian ensemble on `y = h0 x + w` when the
/// decoder scales the input by `alpha0` instead of `h0`.
///
/// Closed form of the one-dimensional Gaussian integrals (see
/// `docs/gmi_derivation.md`): with `c = 1/(2 alpha0^2 P_X)`,
/// `S = h0^2 P_X + N`, `D = (h0-alpha0)^2 P_X + N`, the optimal tilt solves
/// `2cD u^2 - u - 2cS = 0` and the rate is
/// `log(u)/2 + cS(1 - 1/u) - cD(u - 1)`, clamped at zero. The supremum is
/// interior exactly when `h0 alpha0 > 0`.
pub fn gmi_iid_gaussian(h0: f64, noise: f64, alpha0: f64, p_x: f64) -> f64 {
    assert!(noise > 0.0 && p_x > 0.0);
    if h0 * alpha0 <= 0.0 || alpha0 == 0.0 {
        return 0.0;
    }
    let c = 1.0 / (2.0 * alpha0 * alpha0 * p_x);
    let s = h0 * h0 * p_x + noise;
    let d = (h0 - alpha0) * (h0 - alpha0) * p_x + noise;
    let u = (1.0 + (1.0 + 16.0 * c * c * s * d).sqrt()) / (4.0 * c * d);
    if u <= 1.0 {
        return 0.0;
    }
    (0.5 * u.ln() + c * s * (1.0 - 1.0 / u) - c * d * (u - 1.0)).max(0.0)
}

/// KL divergence between two zero-mean bivariate Gaussians given their
/// covariance matrices `[[a, b], [b, c]]`.
pub fn kl_gaussian_bivariate(sigma_q: [[f64; 2]; 2], sigma_p: [[f64; 2]; 2]) -> Result<f64> {
    let det_q = det2(sigma_q);
    let det_p = det2(sigma_p);
    if det_q <= 0.0 || sigma_q[0][0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { minor: if sigma_q[0][0] <= 0.0 { 1 } else { 2 } });
    }
    if det_p <= 0.0 || sigma_p[0][0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { minor: if sigma_p[0][0] <= 0.0 { 1 } else { 2 } });
    }
    // tr(Sigma_P^{-1} Sigma_Q) for 2x2 matrices.
    let trace = (sigma_p[1][1] * sigma_q[0][0] - 2.0 * sigma_p[0][1] * sigma_q[0][1]
        + sigma_p[0][0] * sigma_q[1][1])
        / det_p;
    Ok(0.5 * (trace - 2.0 + (det_p / det_q).ln()))
}

fn det2(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}
