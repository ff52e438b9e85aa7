//! Browser bindings: three interactive views over the core library, each
//! taking a JSON request and returning a JSON reply so the page stays
//! plain JavaScript.

use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use misi::armodel::ar_from_autocov;
use misi::exponents::{error_exponent, error_exponent_universal};
use misi::rates::{rate_universal, sweep_rates, EnsembleSpec, SweepAxis, SweepSpec};
use misi::reference::matched_capacity;
use misi::spectra::freq_response;
use misi::{ChannelModel, DecoderMetric, EvalConfig};

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

#[derive(Deserialize)]
struct ChannelReq {
    h: Vec<f64>,
    sigma2: f64,
    px: f64,
}

impl ChannelReq {
    fn build(&self) -> Result<ChannelModel, misi::Error> {
        ChannelModel::new(self.h.clone(), self.sigma2, self.px)
    }
}

#[derive(Deserialize)]
struct SweepReq {
    channel: ChannelReq,
    /// Base metric taps; the swept tap is overwritten.
    alpha: Vec<f64>,
    /// Index of the metric tap to sweep.
    axis: usize,
    from: f64,
    to: f64,
    points: usize,
    /// Ensemble labels: "gaussian-iid", "ar-p1", "fc-p0", "fc-p1", ...
    ensembles: Vec<String>,
    quad_points: Option<usize>,
    outer_grid: Option<usize>,
}

fn eval_config(quad: Option<usize>, outer: Option<usize>) -> EvalConfig {
    EvalConfig {
        quad_points: quad.unwrap_or(1024),
        outer_grid: outer.unwrap_or(21),
        ..EvalConfig::default()
    }
}

fn parse_ensemble(label: &str) -> Option<EnsembleSpec> {
    if label == "gaussian-iid" {
        return Some(EnsembleSpec::GaussianIid);
    }
    if let Some(p) = label.strip_prefix("ar-p") {
        return p.parse().ok().map(|p| EnsembleSpec::Ar { p });
    }
    if let Some(p) = label.strip_prefix("fc-p") {
        return p.parse().ok().map(|p| EnsembleSpec::FixedComposition { p });
    }
    None
}

/// Achievable-rate curves along one decoder tap, one series per ensemble,
/// with the matched capacity as a reference level.
#[wasm_bindgen]
pub fn rate_sweep(request: &str) -> String {
    let req: SweepReq = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let channel = match req.channel.build() {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let metric = match DecoderMetric::new(req.alpha.clone()) {
        Ok(m) => m,
        Err(e) => return err_json(e),
    };
    let ensembles: Option<Vec<EnsembleSpec>> =
        req.ensembles.iter().map(|l| parse_ensemble(l)).collect();
    let Some(ensembles) = ensembles else {
        return err_json("unknown ensemble label");
    };
    if req.points < 2 || req.to <= req.from {
        return err_json("need at least two sweep points with to > from");
    }
    let cfg = eval_config(req.quad_points, req.outer_grid);
    let values: Vec<f64> = (0..req.points)
        .map(|i| req.from + (req.to - req.from) * i as f64 / (req.points - 1) as f64)
        .collect();
    let spec = SweepSpec {
        channel: channel.clone(),
        metric,
        axis: SweepAxis::MetricTap(req.axis),
        values,
        ensembles,
    };
    let rows = sweep_rates(&spec, &cfg);
    let capacity = match matched_capacity(&channel, cfg.quad_points) {
        Ok(c) => c.capacity,
        Err(e) => return err_json(e),
    };
    json!({
        "axis": spec.axis.label(),
        "capacity": capacity,
        "universal": rate_universal(&channel).rate,
        "rows": rows.iter().map(|r| json!({
            "x": r.axis_value,
            "ensemble": r.ensemble,
            "rate": if r.rate.is_finite() { Some(r.rate) } else { None },
            "status": r.status,
        })).collect::<Vec<_>>(),
    })
    .to_string()
}

#[derive(Deserialize)]
struct ExponentReq {
    channel: ChannelReq,
    alpha0: f64,
    max_rate: f64,
    points: usize,
    quad_points: Option<usize>,
    outer_grid: Option<usize>,
}

/// Error-exponent curves of the metric decoder and the universal decoder
/// over a rate grid.
#[wasm_bindgen]
pub fn exponent_curves(request: &str) -> String {
    let req: ExponentReq = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let channel = match req.channel.build() {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    if req.points < 2 || req.max_rate <= 0.0 {
        return err_json("need points >= 2 and max_rate > 0");
    }
    let cfg = eval_config(req.quad_points, req.outer_grid);
    let rates: Vec<f64> = (0..req.points)
        .map(|i| req.max_rate * i as f64 / (req.points - 1) as f64)
        .collect();
    let mut rows = Vec::new();
    for &rate in &rates {
        let metric = error_exponent(&channel, req.alpha0, rate, &cfg);
        let universal = error_exponent_universal(&channel, rate, &cfg);
        rows.push(json!({
            "rate": rate,
            "metric": metric.ok().map(|e| e.exponent),
            "universal": universal.ok().map(|e| e.exponent),
        }));
    }
    json!({ "rows": rows }).to_string()
}

#[derive(Deserialize)]
struct WaterfillReq {
    channel: ChannelReq,
    /// Composition tail gamma_1.. for the input-spectrum overlay.
    gamma_tail: Option<Vec<f64>>,
    quad_points: Option<usize>,
}

/// Water-filling view: channel gain, allocated input spectrum, capacity
/// and the universal-decoder rate, plus an optional shaped input spectrum.
#[wasm_bindgen]
pub fn waterfill_view(request: &str) -> String {
    let req: WaterfillReq = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let channel = match req.channel.build() {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let quad = req.quad_points.unwrap_or(1024);
    let cap = match matched_capacity(&channel, quad) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let shaped = match &req.gamma_tail {
        Some(tail) if !tail.is_empty() => {
            let mut g = vec![channel.p_x()];
            g.extend_from_slice(tail);
            match misi::armodel::AutocovVector::new(g).and_then(|g| ar_from_autocov(&g)) {
                Ok(params) => Some(params),
                Err(e) => return err_json(e),
            }
        }
        _ => None,
    };
    let n = 256usize;
    let mut grid_rows = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let nu = std::f64::consts::PI * i as f64 / n as f64;
        let gain = freq_response(channel.h(), nu).norm_sqr();
        let allocated = (cap.water_level - channel.sigma2() / gain).max(0.0);
        let shaped_sx = shaped
            .as_ref()
            .map(|p| p.eta2() / misi::spectra::ar_denominator_sq(p.phi(), nu));
        grid_rows.push(json!({
            "nu": nu,
            "gain": gain,
            "allocated": allocated,
            "shaped": shaped_sx,
        }));
    }
    json!({
        "capacity": cap.capacity,
        "water_level": cap.water_level,
        "universal": rate_universal(&channel).rate,
        "grid": grid_rows,
    })
    .to_string()
}
