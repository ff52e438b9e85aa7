//! Random-coding error exponents for the spherical ensemble: the
//! memoryless-metric decoder and the universal correlation (GLRT) decoder.
//!
//! Both exponents share one engine: an outer minimization over the test
//! statistics (output power, input-output correlation) of an inner concave
//! maximization over three dual variables, differing only in the rate term
//! paired with the correlation.

use serde::Serialize;

use crate::channel::ChannelModel;
use crate::optimize::{maximize_outer, minimize_vector_convex, OptStatus};
use crate::spectra::{grid, lag_product, norm_sq};
use crate::{Error, EvalConfig, Result};

/// Feasibility margin on the dual integrand u.
const U_MARGIN: f64 = 1e-9;

/// A computed exponent with the optimizing outer statistics and dual point.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentResult {
    /// Exponent in nats, clamped at zero.
    pub exponent: f64,
    /// Unclamped outer minimum.
    pub raw: f64,
    /// Rate the exponent was evaluated at.
    pub rate: f64,
    /// Outer minimizer (P_Y, rho_XY).
    pub argmin: [f64; 2],
    /// Inner dual maximizer.
    pub arg_omega_hat: [f64; 3],
    pub status: OptStatus,
}

/// Precomputed frequency profiles of the dual integrand. For a memoryless
/// channel the integrand is flat, so a single sample suffices.
struct DualProfiles {
    /// Re/Im of `(h0 + sum_{k>=1} h_k e^{-jk nu}) / sigma^2`.
    resp_re: Vec<f64>,
    resp_im: Vec<f64>,
    /// `(||h||^2/2 + sum_{k>=1} Pi_k(h) cos(k nu)) / sigma^2`.
    bracket: Vec<f64>,
    sigma2: f64,
    p_x: f64,
}

impl DualProfiles {
    fn new(channel: &ChannelModel, quad_points: usize) -> Self {
        let h = channel.h();
        let s2 = channel.sigma2();
        let n = if h.len() == 1 { 1 } else { quad_points };
        let mut resp_re = Vec::with_capacity(n);
        let mut resp_im = Vec::with_capacity(n);
        let mut bracket = Vec::with_capacity(n);
        let half_norm = norm_sq(h) / 2.0;
        for nu in grid(n.next_power_of_two().max(8)).take(n) {
            let mut re = h[0];
            let mut im = 0.0;
            let mut br = half_norm;
            for (k, &hk) in h.iter().enumerate().skip(1) {
                re += hk * (k as f64 * nu).cos();
                im -= hk * (k as f64 * nu).sin();
                br += lag_product(h, k) * (k as f64 * nu).cos();
            }
            resp_re.push(re / s2);
            resp_im.push(im / s2);
            bracket.push(br / s2);
        }
        DualProfiles { resp_re, resp_im, bracket, sigma2: s2, p_x: channel.p_x() }
    }

    /// `(1/2pi) int log(4 e P_X sigma^2 u(nu)) dnu`, or None when u dips
    /// below the feasibility margin or the underlying Gaussian integral
    /// diverges (lambda <= 0).
    fn log_term(&self, w: [f64; 3]) -> Option<f64> {
        let lambda = 1.0 / (2.0 * self.sigma2) + w[2];
        if lambda <= 0.0 {
            return None;
        }
        let scale = 4.0 * std::f64::consts::E * self.p_x * self.sigma2;
        let mut acc = 0.0;
        for i in 0..self.bracket.len() {
            let re = w[1] - self.resp_re[i];
            let im = self.resp_im[i];
            let u = lambda * (w[0] + self.bracket[i]) - (re * re + im * im) / 4.0;
            if u < U_MARGIN {
                return None;
            }
            acc += (scale * u).ln();
        }
        Some(acc / self.bracket.len() as f64)
    }

    fn v(&self, w: [f64; 3], p_y: f64, rho: f64) -> Option<f64> {
        let log_term = self.log_term(w)?;
        Some(
            0.5 * log_term
                - w[0] * self.p_x
                - w[1] * rho * (self.p_x * p_y).sqrt()
                - w[2] * p_y,
        )
    }

    /// A point with lambda > 0 and u uniformly positive: center the cross
    /// term and push the bracket well past its most negative excursion.
    fn interior_start(&self, h: &[f64]) -> [f64; 3] {
        let s2 = self.sigma2;
        let lambda0 = 1.0 / (2.0 * s2);
        let abs_lags: f64 = (1..h.len()).map(|k| lag_product(h, k).abs()).sum();
        let tail_mag: f64 = h.iter().skip(1).map(|hk| hk.abs()).sum::<f64>() / s2;
        let w1 = h[0] / s2;
        let w0 = (norm_sq(h) / 2.0 + abs_lags) / s2 + (1.0 + tail_mag * tail_mag / 4.0) / lambda0;
        [w0, w1, 0.0]
    }

    /// Concave inner maximum of V over the dual set at fixed statistics.
    fn max_v(&self, h: &[f64], p_y: f64, rho: f64, tol: f64) -> Option<(f64, [f64; 3])> {
        let objective = |w: &[f64]| -> f64 {
            match self.v([w[0], w[1], w[2]], p_y, rho) {
                Some(v) => -v,
                None => f64::INFINITY,
            }
        };
        let start = self.interior_start(h);
        let res = minimize_vector_convex(objective, |_| true, &start, tol);
        if !res.converged() {
            return None;
        }
        Some((-res.value, [res.arg[0], res.arg[1], res.arg[2]]))
    }
}

/// Dual objective `V(omega_hat, P_Y, rho_XY)`; `Err(Infeasible)` when
/// `omega_hat` leaves the dual set.
pub fn objective_v(
    omega_hat: [f64; 3],
    p_y: f64,
    rho: f64,
    channel: &ChannelModel,
    quad_points: usize,
) -> Result<f64> {
    if !p_y.is_finite() || p_y <= 0.0 || rho.abs() > 1.0 {
        return Err(Error::InvalidInput(format!("need p_y > 0 and |rho| <= 1, got {p_y}, {rho}")));
    }
    DualProfiles::new(channel, quad_points)
        .v(omega_hat, p_y, rho)
        .ok_or_else(|| Error::Infeasible("dual integrand is not positive on the grid".into()))
}

/// Maximum of [`objective_v`] over the dual set at fixed statistics,
/// with the maximizing dual point.
pub fn max_objective_v(
    channel: &ChannelModel,
    p_y: f64,
    rho: f64,
    cfg: &EvalConfig,
) -> Result<(f64, [f64; 3])> {
    if !p_y.is_finite() || p_y <= 0.0 || rho.abs() > 1.0 {
        return Err(Error::InvalidInput(format!("need p_y > 0 and |rho| <= 1, got {p_y}, {rho}")));
    }
    let profiles = DualProfiles::new(channel, cfg.quad_points);
    profiles
        .max_v(channel.h(), p_y, rho, cfg.vector_tol)
        .ok_or_else(|| Error::Infeasible("inner dual maximization failed to converge".into()))
}

/// Rate term paired with the correlation for the metric decoder:
/// `-log(1-rho^2)/2` when the leading taps agree in sign, zero when they
/// disagree, saturating at +inf as |rho| -> 1.
pub fn mismatch_info(rho: f64, h0: f64, alpha0: f64) -> f64 {
    let weight = (sign_of(h0) + sign_of(alpha0)).abs() / 4.0;
    if weight == 0.0 {
        return 0.0;
    }
    if rho.abs() >= 1.0 {
        return f64::INFINITY;
    }
    -weight * (1.0 - rho * rho).ln()
}

fn sign_of(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Exponent of the memoryless-metric decoder with coefficient `alpha0`
/// over the spherical ensemble.
pub fn error_exponent(
    channel: &ChannelModel,
    alpha0: f64,
    rate: f64,
    cfg: &EvalConfig,
) -> Result<ExponentResult> {
    let h0 = channel.h()[0];
    exponent_min(channel, rate, cfg, move |rho| mismatch_info(rho, h0, alpha0))
}

/// Exponent of the universal correlation (GLRT) decoder: the same engine
/// with the sign rule removed.
pub fn error_exponent_universal(
    channel: &ChannelModel,
    rate: f64,
    cfg: &EvalConfig,
) -> Result<ExponentResult> {
    exponent_min(channel, rate, cfg, |rho| {
        if rho.abs() >= 1.0 {
            f64::INFINITY
        } else {
            -0.5 * (1.0 - rho * rho).ln()
        }
    })
}

fn exponent_min(
    channel: &ChannelModel,
    rate: f64,
    cfg: &EvalConfig,
    info: impl Fn(f64) -> f64 + Sync + Send,
) -> Result<ExponentResult> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidInput(format!("rate must be nonnegative, got {rate}")));
    }
    let profiles = DualProfiles::new(channel, cfg.quad_points);
    let h = channel.h().to_vec();
    let rho_lim = 1.0 - 1e-6;

    let mut p_y_max = 4.0 * (channel.tap_norm_sq() * channel.p_x() + channel.sigma2());
    for _ in 0..5 {
        let objective = |x: &[f64]| -> f64 {
            let (p_y, rho) = (x[0], x[1]);
            match profiles.max_v(&h, p_y, rho, cfg.vector_tol) {
                // Outer minimization runs through the maximizer by negation.
                Some((v, _)) => -(v + (info(rho) - rate).max(0.0)),
                None => f64::NEG_INFINITY,
            }
        };
        let p_y_min = p_y_max * 1e-3;
        let bounds = [(p_y_min, p_y_max), (-rho_lim, rho_lim)];
        let outer = maximize_outer(objective, &bounds, cfg.outer_grid);
        if outer.status == OptStatus::Infeasible {
            return Err(Error::Infeasible("no feasible outer statistics found".into()));
        }
        let step = (p_y_max - p_y_min) / (cfg.outer_grid - 1) as f64;
        if outer.arg[0] >= p_y_max - step {
            // Minimum pushed against the box; widen and retry.
            p_y_max *= 2.0;
            continue;
        }
        let (p_y, rho) = (outer.arg[0], outer.arg[1]);
        let (_, w) = profiles
            .max_v(&h, p_y, rho, cfg.vector_tol)
            .ok_or_else(|| Error::Infeasible("inner maximization lost feasibility".into()))?;
        let raw = -outer.value;
        return Ok(ExponentResult {
            exponent: raw.max(0.0),
            raw,
            rate,
            argmin: [p_y, rho],
            arg_omega_hat: w,
            status: outer.status,
        });
    }
    Err(Error::Infeasible("outer minimizer kept hitting the widened P_Y bound".into()))
}

/// Exponent-rate curve rows, one per requested rate, for CSV export.
pub fn exponent_curve(
    channel: &ChannelModel,
    decoder_alpha0: Option<f64>,
    rates: &[f64],
    cfg: &EvalConfig,
) -> Vec<Result<ExponentResult>> {
    crate::run_indexed(rates.len(), |i| match decoder_alpha0 {
        Some(a0) => error_exponent(channel, a0, rates[i], cfg),
        None => error_exponent_universal(channel, rates[i], cfg),
    })
}

/// CSV rendering of an exponent curve: `rate,exponent,p_y,rho,status`.
pub fn exponent_curve_to_csv(rows: &[Result<ExponentResult>], rates: &[f64]) -> String {
    let mut out = String::from("rate,exponent,p_y,rho,status\n");
    for (rate, row) in rates.iter().zip(rows) {
        match row {
            Ok(r) => {
                let status = format!("{:?}", r.status).to_lowercase();
                out.push_str(&format!(
                    "{:.9e},{:.9e},{:.9e},{:.9e},{}\n",
                    r.rate, r.exponent, r.argmin[0], r.argmin[1], status
                ));
            }
            Err(e) => out.push_str(&format!("{rate:.9e},nan,nan,nan,error: {e}\n")),
        }
    }
    out
}
