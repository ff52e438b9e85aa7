//! Achievable-rate lower bounds for the mismatched decoder.
//!
//! Three codebook ensembles are covered: stationary autoregressive inputs
//! (one scalar inner dual variable), fixed-composition / type-class inputs
//! (a p+2 dimensional inner dual on a cone), and the closed-form rate of
//! the universal correlation decoder. Each bound comes in a fixed-parameter
//! flavor and an outer-optimized flavor, plus a sweep driver that tabulates
//! rates along one channel or metric coefficient.

use serde::Serialize;

use crate::armodel::{ar_from_autocov, autocov_from_ar, validate_phi, ArParams, AutocovVector};
use crate::channel::{common_taps, ChannelModel, DecoderMetric};
use crate::optimize::{
    maximize_outer, minimize_scalar_convex, minimize_vector_convex, OptStatus,
};
use crate::spectra::{
    ar_denominator_sq, freq_response, grid, lag_product, norm_sq, LOG_FLOOR,
};
use crate::{Error, EvalConfig, Result};

/// A computed rate bound with its optimizing variables.
#[derive(Debug, Clone, Serialize)]
pub struct RateResult {
    /// Bound in nats per channel use, clamped at zero.
    pub rate: f64,
    /// Unclamped bound value.
    pub raw: f64,
    /// Inner dual minimizer (omega).
    pub inner_argmin: Vec<f64>,
    /// Outer maximizer (phi or gamma tail) when an outer search ran.
    pub outer_argmax: Option<Vec<f64>>,
    pub quadrature_points: usize,
    pub status: OptStatus,
}

/// `sum_{l,i} alpha_l h_i gamma_{|l-i|}` over the padded tap range.
fn cross_correlation(alpha: &[f64], h: &[f64], gamma: &AutocovVector) -> f64 {
    let mut acc = 0.0;
    for (l, &a) in alpha.iter().enumerate() {
        for (i, &hi) in h.iter().enumerate() {
            acc += a * hi * gamma.at(l as isize - i as isize);
        }
    }
    acc
}

/// Per-frequency profiles shared by both inner problems: `|A|^2` and
/// `S_Y |A|^2` sampled on the quadrature grid.
fn metric_profiles(
    h: &[f64],
    alpha: &[f64],
    phi: &[f64],
    eta2: f64,
    sigma2: f64,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut a2 = Vec::with_capacity(n);
    let mut sy_a2 = Vec::with_capacity(n);
    for nu in grid(n) {
        let a = freq_response(alpha, nu).norm_sqr();
        let s_x = eta2 / ar_denominator_sq(phi, nu);
        let s_y = freq_response(h, nu).norm_sqr() * s_x + sigma2;
        a2.push(a);
        sy_a2.push(s_y * a);
    }
    (a2, sy_a2)
}

/// Rate of the autoregressive ensemble with fixed AR coefficients.
///
/// The bound is `log(2 eta^2)/2` minus the scalar convex minimum of
/// `-mean(log f_w)/2 + (w^2/4) mean(S_Y |A|^2 / f_w) - w psi`, where
/// `psi` collects the correlation statistics of the metric against the
/// input autocovariances.
pub fn rate_ar_fixed(
    channel: &ChannelModel,
    metric: &DecoderMetric,
    phi: &[f64],
    cfg: &EvalConfig,
) -> Result<RateResult> {
    if !validate_phi(phi).is_valid() {
        return Err(Error::UnstableAr(format!("{phi:?}")));
    }
    let (h, alpha) = common_taps(channel, metric);
    let big_k = h.len() - 1;
    let params = ArParams::from_phi(phi, channel.p_x(), cfg.quad_points)?;
    let eta2 = params.eta2();
    let gamma = autocov_from_ar(&params, big_k)?;

    let mut psi = cross_correlation(&alpha, &h, &gamma);
    psi -= 0.5 * norm_sq(&alpha) * gamma.at(0);
    for l in 1..=big_k {
        psi -= lag_product(&alpha, l) * gamma.at(l as isize);
    }

    let n = cfg.quad_points;
    let (a2, sy_a2) = metric_profiles(&h, &alpha, phi, eta2, channel.sigma2(), n);
    let bracket: Vec<f64> = grid(n).map(|nu| ar_denominator_sq(phi, nu) / (2.0 * eta2)).collect();

    let objective = |w: f64| -> f64 {
        let mut log_acc = 0.0;
        let mut ratio_acc = 0.0;
        for i in 0..n {
            let f = 0.5 * w * a2[i] + bracket[i];
            if f < LOG_FLOOR {
                return f64::INFINITY;
            }
            log_acc += f.ln();
            ratio_acc += sy_a2[i] / f;
        }
        -0.5 * log_acc / n as f64 + 0.25 * w * w * ratio_acc / n as f64 - w * psi
    };

    let inner = minimize_scalar_convex(objective, 0.0, (0.0, 1.0), cfg.scalar_tol);
    if inner.status == OptStatus::Infeasible {
        return Err(Error::Infeasible("AR inner minimization never found a finite value".into()));
    }
    let raw = 0.5 * (2.0 * eta2).ln() - inner.value;
    Ok(RateResult {
        rate: raw.max(0.0),
        raw,
        inner_argmin: inner.arg,
        outer_argmax: None,
        quadrature_points: n,
        status: inner.status,
    })
}

/// Coefficient bounds containing every stable AR(p) vector:
/// `|phi_i| <= C(p, i)` from expanding a product of unit-disc roots.
fn stable_box(p: usize) -> Vec<(f64, f64)> {
    (1..=p)
        .map(|i| {
            let b = binomial(p, i);
            (-b, b)
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Rate of the AR ensemble maximized over stable coefficients of order `p`.
pub fn rate_ar_opt(
    channel: &ChannelModel,
    metric: &DecoderMetric,
    p: usize,
    cfg: &EvalConfig,
) -> Result<RateResult> {
    if p == 0 {
        let mut r = rate_ar_fixed(channel, metric, &[], cfg)?;
        r.outer_argmax = Some(Vec::new());
        return Ok(r);
    }
    let objective = |phi: &[f64]| -> f64 {
        if !validate_phi(phi).is_valid() {
            return f64::NEG_INFINITY;
        }
        match rate_ar_fixed(channel, metric, phi, cfg) {
            Ok(r) => r.rate,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let outer = maximize_outer(objective, &stable_box(p), cfg.outer_grid);
    if outer.status == OptStatus::Infeasible {
        return Err(Error::Infeasible("no stable AR point found in the search box".into()));
    }
    let mut best = rate_ar_fixed(channel, metric, &outer.arg, cfg)?;
    best.outer_argmax = Some(outer.arg);
    Ok(best)
}

/// Rate of the fixed-composition (type-class) ensemble for a given
/// autocovariance composition `gamma_0..gamma_p` with `gamma_0 = P_X`.
///
/// The inner dual minimizes over p+2 multipliers: one sign-free multiplier
/// per pinned composition lag, and one nonnegative multiplier for the
/// one-sided metric-score constraint, on the domain where the spectral
/// combination g stays positive.
pub fn rate_fc_fixed(
    channel: &ChannelModel,
    metric: &DecoderMetric,
    gamma: &AutocovVector,
    cfg: &EvalConfig,
) -> Result<RateResult> {
    if (gamma.at(0) - channel.p_x()).abs() > 1e-9 * channel.p_x().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "gamma_0 = {} must equal the power constraint {}",
            gamma.at(0),
            channel.p_x()
        )));
    }
    let (h, alpha) = common_taps(channel, metric);
    let big_k = h.len() - 1;
    let p = gamma.max_lag();

    let params = ar_from_autocov(gamma)?;
    let eta2 = params.eta2();
    // Lags past p follow the AR recursion fitted to the composition.
    let gamma_ext = if p < big_k {
        autocov_from_ar(&params, big_k)?
    } else {
        gamma.clone()
    };

    let lag_floor = 1 + p.min(big_k);
    let mut psi = cross_correlation(&alpha, &h, &gamma_ext);
    for l in lag_floor..=big_k {
        psi -= lag_product(&alpha, l) * gamma_ext.at(l as isize);
    }
    let alpha_lag_abs: f64 = (lag_floor..=big_k).map(|l| lag_product(&alpha, l).abs()).sum();

    let n = cfg.quad_points;
    let (_, sy_a2) = metric_profiles(&h, &alpha, params.phi(), eta2, channel.sigma2(), n);
    let cos_table: Vec<Vec<f64>> = (0..=p)
        .map(|k| grid(n).map(|nu| (k as f64 * nu).cos()).collect())
        .collect();
    let alpha_profile: Vec<f64> = grid(n)
        .map(|nu| {
            (lag_floor..=big_k)
                .map(|l| lag_product(&alpha, l) * (l as f64 * nu).cos())
                .sum()
        })
        .collect();

    let gamma_head: Vec<f64> = gamma.gamma().to_vec();
    // The composition constraints are two-sided, so their multipliers
    // w_0..w_p range over all of R; only the metric-score multiplier
    // w_{p+1} is one-sided. Positivity of g on the grid (the condition for
    // the underlying Gaussian integral to converge) is enforced through
    // the log floor in the objective.
    let feasible = |w: &[f64]| -> bool { w[p + 1] >= 0.0 };
    let objective = |w: &[f64]| -> f64 {
        let w_last = w[p + 1];
        let mut log_acc = 0.0;
        let mut ratio_acc = 0.0;
        for i in 0..n {
            let mut g = w_last * alpha_profile[i];
            for (k, table) in cos_table.iter().enumerate() {
                g += w[k] * table[i];
            }
            if g.is_nan() || g < LOG_FLOOR {
                return f64::INFINITY;
            }
            log_acc += g.ln();
            ratio_acc += sy_a2[i] / g;
        }
        let linear: f64 = (0..=p).map(|k| w[k] * gamma_head[k]).sum();
        -0.5 * log_acc / n as f64 + 0.25 * w_last * w_last * ratio_acc / n as f64
            - w_last * psi
            + linear
    };

    // Strictly diagonally dominant start.
    let mut start = vec![0.01; p + 2];
    start[0] = 1.0 + start[1..=p].iter().sum::<f64>() + start[p + 1] * alpha_lag_abs;

    let inner = minimize_vector_convex(objective, feasible, &start, cfg.vector_tol);
    if inner.status == OptStatus::Infeasible {
        return Err(Error::Infeasible("fixed-composition dual cone is empty".into()));
    }
    let raw = 0.5 * (2.0 * std::f64::consts::E * eta2).ln() - inner.value;
    Ok(RateResult {
        rate: raw.max(0.0),
        raw,
        inner_argmin: inner.arg,
        outer_argmax: None,
        quadrature_points: n,
        status: inner.status,
    })
}

/// Fixed-composition rate maximized over the correlation parameters
/// `gamma_1..gamma_p` (with `gamma_0 = P_X` pinned and positive
/// definiteness enforced by scoring violations as -inf).
pub fn rate_fc_opt(
    channel: &ChannelModel,
    metric: &DecoderMetric,
    p: usize,
    cfg: &EvalConfig,
) -> Result<RateResult> {
    let p_x = channel.p_x();
    if p == 0 {
        let gamma = AutocovVector::new(vec![p_x])?;
        let mut r = rate_fc_fixed(channel, metric, &gamma, cfg)?;
        r.outer_argmax = Some(Vec::new());
        return Ok(r);
    }
    let objective = |tail: &[f64]| -> f64 {
        let mut g = Vec::with_capacity(p + 1);
        g.push(p_x);
        g.extend_from_slice(tail);
        let Ok(gamma) = AutocovVector::new(g) else {
            return f64::NEG_INFINITY;
        };
        match rate_fc_fixed(channel, metric, &gamma, cfg) {
            Ok(r) => r.rate,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let lim = p_x * (1.0 - 1e-6);
    let bounds = vec![(-lim, lim); p];
    let outer = maximize_outer(objective, &bounds, cfg.outer_grid);
    if outer.status == OptStatus::Infeasible {
        return Err(Error::Infeasible("no positive-definite composition in the search box".into()));
    }
    let mut g = Vec::with_capacity(p + 1);
    g.push(p_x);
    g.extend_from_slice(&outer.arg);
    let mut best = rate_fc_fixed(channel, metric, &AutocovVector::new(g)?, cfg)?;
    best.outer_argmax = Some(outer.arg);
    Ok(best)
}

/// Closed-form achievable rate of the universal correlation (GLRT) decoder:
/// the off-peak taps act as extra Gaussian noise.
pub fn rate_universal(channel: &ChannelModel) -> RateResult {
    let h0 = channel.h()[0];
    let residue = channel.tap_norm_sq() - h0 * h0;
    let raw = 0.5
        * (1.0 + h0 * h0 * channel.p_x() / (residue * channel.p_x() + channel.sigma2())).ln();
    RateResult {
        rate: raw.max(0.0),
        raw,
        inner_argmin: Vec::new(),
        outer_argmax: None,
        quadrature_points: 0,
        status: OptStatus::Converged,
    }
}

/// Which coefficient a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    MetricTap(usize),
    ChannelTap(usize),
}

impl SweepAxis {
    pub fn label(&self) -> String {
        match self {
            SweepAxis::MetricTap(k) => format!("alpha_{k}"),
            SweepAxis::ChannelTap(k) => format!("h_{k}"),
        }
    }
}

/// Codebook ensembles selectable in a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EnsembleSpec {
    /// White Gaussian codewords (AR of order zero).
    GaussianIid,
    /// AR ensemble, coefficients optimized at each sweep point.
    Ar { p: usize },
    /// Fixed-composition ensemble, correlations optimized at each point.
    FixedComposition { p: usize },
}

impl EnsembleSpec {
    pub fn label(&self) -> String {
        match self {
            EnsembleSpec::GaussianIid => "gaussian-iid".into(),
            EnsembleSpec::Ar { p } => format!("ar-p{p}"),
            EnsembleSpec::FixedComposition { p } => format!("fc-p{p}"),
        }
    }
}

/// A sweep scenario: base channel and metric, the coefficient to vary, the
/// grid of values, and the ensembles to tabulate.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub channel: ChannelModel,
    pub metric: DecoderMetric,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub ensembles: Vec<EnsembleSpec>,
}

/// One sweep table entry. Failed points carry the error text in `status`
/// and a NaN rate; the sweep itself keeps going.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub ensemble: String,
    pub rate: f64,
    pub status: String,
}

/// Tabulates rates over the sweep grid, one row per (value, ensemble).
/// Points are evaluated independently (in parallel when enabled) and the
/// row order is by grid index then ensemble index.
pub fn sweep_rates(spec: &SweepSpec, cfg: &EvalConfig) -> Vec<SweepRow> {
    let tasks: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.ensembles.len()).map(move |e| (v, e)))
        .collect();
    crate::run_indexed(tasks.len(), |t| {
        let (vi, ei) = tasks[t];
        let value = spec.values[vi];
        let ensemble = &spec.ensembles[ei];
        let row = |rate: f64, status: String| SweepRow {
            axis_value: value,
            ensemble: ensemble.label(),
            rate,
            status,
        };
        match sweep_point(spec, value, ensemble, cfg) {
            Ok(r) => row(r.rate, format!("{:?}", r.status).to_lowercase()),
            Err(e) => row(f64::NAN, format!("error: {e}")),
        }
    })
}

fn sweep_point(
    spec: &SweepSpec,
    value: f64,
    ensemble: &EnsembleSpec,
    cfg: &EvalConfig,
) -> Result<RateResult> {
    let mut channel = spec.channel.clone();
    let mut metric = spec.metric.clone();
    match spec.axis {
        SweepAxis::MetricTap(k) => {
            let mut a = metric.alpha().to_vec();
            if a.len() <= k {
                a.resize(k + 1, 0.0);
            }
            a[k] = value;
            metric = DecoderMetric::new(a)?;
        }
        SweepAxis::ChannelTap(k) => {
            let mut h = channel.h().to_vec();
            if h.len() <= k {
                h.resize(k + 1, 0.0);
            }
            h[k] = value;
            channel = ChannelModel::new(h, channel.sigma2(), channel.p_x())?;
        }
    }
    match ensemble {
        EnsembleSpec::GaussianIid => rate_ar_fixed(&channel, &metric, &[], cfg),
        EnsembleSpec::Ar { p } => rate_ar_opt(&channel, &metric, *p, cfg),
        EnsembleSpec::FixedComposition { p } => rate_fc_opt(&channel, &metric, *p, cfg),
    }
}

/// CSV rendering of a sweep: header row naming the axis, then one data row
/// per point with values printed to 10 significant digits.
pub fn sweep_to_csv(axis: &SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{},ensemble,rate,status\n", axis.label());
    for r in rows {
        out.push_str(&format!(
            "{:.9e},{},{:.9e},{}\n",
            r.axis_value, r.ensemble, r.rate, r.status
        ));
    }
    out
}
