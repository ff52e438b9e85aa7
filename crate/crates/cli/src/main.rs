//! Command-line front end: every evaluation in the library as a
//! subcommand, with flag/config-file input, JSON or CSV output, and
//! figure-reproduction presets.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use misi::armodel::AutocovVector;
use misi::exponents::{
    error_exponent, error_exponent_universal, exponent_curve, exponent_curve_to_csv,
};
use misi::rates::{
    rate_ar_fixed, rate_ar_opt, rate_fc_fixed, rate_fc_opt, rate_universal, sweep_rates,
    sweep_to_csv, EnsembleSpec, SweepAxis, SweepSpec,
};
use misi::reference::matched_capacity;
use misi::simulator::{simulate_error_prob, Decoder, Ensemble, SimConfig};
use misi::{ChannelModel, DecoderMetric, EvalConfig};

use config::{parse_list, FileConfig};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    fn invalid(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }
    fn infeasible(msg: impl Into<String>) -> Self {
        CliError { code: 3, msg: msg.into() }
    }
    fn io(msg: impl Into<String>) -> Self {
        CliError { code: 4, msg: msg.into() }
    }
}

impl From<misi::Error> for CliError {
    fn from(e: misi::Error) -> Self {
        match e {
            misi::Error::Infeasible(_) => CliError::infeasible(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "misi",
    about = "Achievable rates, error exponents, and Monte Carlo simulation \
             for Gaussian ISI channels under mismatched decoding",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Channel taps, comma separated (e.g. 0.70710678,0.70710678).
    #[arg(long)]
    h: Option<String>,
    /// Noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Input power constraint.
    #[arg(long)]
    px: Option<f64>,
    /// Plain-text key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Periodic quadrature grid size (power of two).
    #[arg(long)]
    quad_points: Option<usize>,
    /// Coarse outer-search grid points per axis.
    #[arg(long)]
    outer_grid: Option<usize>,
    /// Argmin tolerance of the scalar inner minimizer.
    #[arg(long)]
    scalar_tol: Option<f64>,
    /// Successive-value tolerance of the vector inner minimizer.
    #[arg(long)]
    vector_tol: Option<f64>,
    /// Also report rates converted to bits (nats stay canonical).
    #[arg(long)]
    bits: bool,
}

struct Resolved {
    channel: ChannelModel,
    cfg: EvalConfig,
    file: FileConfig,
    out: Option<PathBuf>,
    bits: bool,
    echo: Value,
}

impl CommonArgs {
    fn resolve(&self, default_h: Option<&[f64]>) -> Result<Resolved, CliError> {
        let file = FileConfig::load(self.config.as_deref())?;
        let h = file.list_or(self.h.as_deref(), "h", default_h)?;
        let sigma2 = file.f64_or(self.sigma2, "sigma2", 1.0)?;
        let px = file.f64_or(self.px, "px", 1.0)?;
        let quad = file.usize_or(self.quad_points, "quad_points", 4096)?;
        let outer = file.usize_or(self.outer_grid, "outer_grid", 41)?;
        let defaults = EvalConfig::default();
        let scalar_tol = file.f64_or(self.scalar_tol, "scalar_tol", defaults.scalar_tol)?;
        let vector_tol = file.f64_or(self.vector_tol, "vector_tol", defaults.vector_tol)?;
        let channel = ChannelModel::new(h.clone(), sigma2, px)?;
        let cfg = EvalConfig { quad_points: quad, outer_grid: outer, scalar_tol, vector_tol };
        let echo = json!({
            "h": h,
            "sigma2": sigma2,
            "px": px,
            "quad_points": quad,
            "outer_grid": outer,
            "scalar_tol": scalar_tol,
            "vector_tol": vector_tol,
        });
        Ok(Resolved { channel, cfg, file, out: self.out.clone(), bits: self.bits, echo })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Achievable rate of the autoregressive ensemble.
    RateAr {
        #[command(flatten)]
        common: CommonArgs,
        /// Decoder metric taps, comma separated.
        #[arg(long)]
        alpha: Option<String>,
        /// Fixed AR coefficients (mutually exclusive with --p).
        #[arg(long)]
        phi: Option<String>,
        /// AR order to optimize over.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Achievable rate of the fixed-composition (type-class) ensemble.
    RateFc {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        alpha: Option<String>,
        /// Fixed correlations gamma_1..gamma_p (gamma_0 = px).
        #[arg(long)]
        gamma: Option<String>,
        /// Composition order to optimize over.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Closed-form rate of the universal correlation (GLRT) decoder.
    RateUniversal {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Error exponent of the memoryless-metric decoder.
    Exponent {
        #[command(flatten)]
        common: CommonArgs,
        /// Decoder coefficient alpha_0.
        #[arg(long)]
        alpha0: Option<f64>,
        /// Single rate (JSON output).
        #[arg(long)]
        rate: Option<f64>,
        /// Rate list (CSV curve output).
        #[arg(long)]
        rates: Option<String>,
    },
    /// Error exponent of the universal correlation (GLRT) decoder.
    ExponentUniversal {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        rates: Option<String>,
    },
    /// Matched water-filling capacity of the channel.
    MatchedCapacity {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rate sweep along one metric or channel coefficient (CSV).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        alpha: Option<String>,
        /// Axis name: alpha_K or h_K (e.g. alpha_1).
        #[arg(long)]
        axis: String,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Explicit value list; overrides from/to/points.
        #[arg(long)]
        values: Option<String>,
        /// Comma-separated ensembles: gaussian-iid, ar-pN, fc-pN.
        #[arg(long)]
        ensembles: Option<String>,
    },
    /// Monte Carlo error probability of the actual coding system (JSON).
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Block length.
        #[arg(long)]
        n: Option<usize>,
        /// Rate in nats.
        #[arg(long)]
        rate: Option<f64>,
        /// Ensemble: ar | sphere | type-class.
        #[arg(long)]
        ensemble: Option<String>,
        /// AR coefficients for --ensemble ar.
        #[arg(long)]
        phi: Option<String>,
        /// Correlations gamma_1.. for --ensemble type-class.
        #[arg(long)]
        gamma: Option<String>,
        /// Composition tolerance for --ensemble type-class.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Decoder: metric | glrt.
        #[arg(long)]
        decoder: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rebuild one of the reference figures as a CSV data sweep.
    ReproduceFigure {
        #[command(flatten)]
        common: CommonArgs,
        /// Figure number: 1, 2, 3 or 5.
        figure: u8,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MISI_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::RateAr { common, alpha, phi, p } => {
            let r = common.resolve(None)?;
            let alpha = r.file.list_or(alpha.as_deref(), "alpha", None)?;
            let metric = DecoderMetric::new(alpha.clone())?;
            let (result, ensemble_echo) = match (&phi, p) {
                (Some(_), Some(_)) => {
                    return Err(CliError::invalid("--phi and --p are mutually exclusive"))
                }
                (Some(list), None) => {
                    let phi = parse_list(list).map_err(CliError::invalid)?;
                    (rate_ar_fixed(&r.channel, &metric, &phi, &r.cfg)?, json!({ "phi": phi }))
                }
                (None, p) => {
                    let p = p.unwrap_or(0);
                    (rate_ar_opt(&r.channel, &metric, p, &r.cfg)?, json!({ "p": p }))
                }
            };
            emit_rate_json(&r, "rate-ar", json!({ "alpha": alpha, "ensemble": ensemble_echo }), &result)
        }
        Cmd::RateFc { common, alpha, gamma, p } => {
            let r = common.resolve(None)?;
            let alpha = r.file.list_or(alpha.as_deref(), "alpha", None)?;
            let metric = DecoderMetric::new(alpha.clone())?;
            let (result, ensemble_echo) = match (&gamma, p) {
                (Some(_), Some(_)) => {
                    return Err(CliError::invalid("--gamma and --p are mutually exclusive"))
                }
                (Some(list), None) => {
                    let tail = parse_list(list).map_err(CliError::invalid)?;
                    let mut g = vec![r.channel.p_x()];
                    g.extend_from_slice(&tail);
                    let gamma = AutocovVector::new(g)?;
                    (
                        rate_fc_fixed(&r.channel, &metric, &gamma, &r.cfg)?,
                        json!({ "gamma_tail": tail }),
                    )
                }
                (None, p) => {
                    let p = p.unwrap_or(0);
                    (rate_fc_opt(&r.channel, &metric, p, &r.cfg)?, json!({ "p": p }))
                }
            };
            emit_rate_json(&r, "rate-fc", json!({ "alpha": alpha, "ensemble": ensemble_echo }), &result)
        }
        Cmd::RateUniversal { common } => {
            let r = common.resolve(None)?;
            let result = rate_universal(&r.channel);
            emit_rate_json(&r, "rate-universal", json!({}), &result)
        }
        Cmd::Exponent { common, alpha0, rate, rates } => {
            let r = common.resolve(None)?;
            let alpha0 = r.file.f64_or(alpha0, "alpha0", 1.0)?;
            exponent_output(&r, "exponent", Some(alpha0), rate, rates.as_deref())
        }
        Cmd::ExponentUniversal { common, rate, rates } => {
            let r = common.resolve(None)?;
            exponent_output(&r, "exponent-universal", None, rate, rates.as_deref())
        }
        Cmd::MatchedCapacity { common } => {
            let r = common.resolve(None)?;
            let result = matched_capacity(&r.channel, r.cfg.quad_points)?;
            let mut doc = json!({
                "command": "matched-capacity",
                "config": r.echo,
                "result": result,
            });
            if r.bits {
                doc["capacity_bits"] = json!(result.capacity / std::f64::consts::LN_2);
            }
            write_output(r.out.as_deref(), &render_json(doc))
        }
        Cmd::Sweep { common, alpha, axis, from, to, points, values, ensembles } => {
            let r = common.resolve(None)?;
            let alpha = r.file.list_or(alpha.as_deref(), "alpha", None)?;
            let metric = DecoderMetric::new(alpha.clone())?;
            let axis = parse_axis(&axis)?;
            let values = match values {
                Some(list) => parse_list(&list).map_err(CliError::invalid)?,
                None => {
                    let from = from.ok_or_else(|| CliError::invalid("need --from or --values"))?;
                    let to = to.ok_or_else(|| CliError::invalid("need --to or --values"))?;
                    let points = points.unwrap_or(41).max(2);
                    linspace(from, to, points)
                }
            };
            let ensembles = parse_ensembles(ensembles.as_deref().unwrap_or("gaussian-iid,fc-p0"))?;
            let spec = SweepSpec { channel: r.channel.clone(), metric, axis, values, ensembles };
            let rows = sweep_rates(&spec, &r.cfg);
            eprintln!(
                "{}",
                render_json(json!({ "command": "sweep", "config": r.echo, "alpha": alpha }))
            );
            write_output(r.out.as_deref(), &sweep_to_csv(&spec.axis, &rows))
        }
        Cmd::Simulate {
            common,
            n,
            rate,
            ensemble,
            phi,
            gamma,
            epsilon,
            decoder,
            alpha,
            trials,
            seed,
        } => {
            let r = common.resolve(None)?;
            let n = r.file.usize_or(n, "n", 64)?;
            let rate = r.file.f64_or(rate, "rate", 0.1)?;
            let trials = r.file.usize_or(trials, "trials", 1000)?;
            let seed = r.file.u64_or(seed, "seed", 0)?;
            let epsilon = r.file.f64_or(epsilon, "epsilon", 0.05 * r.channel.p_x())?;
            let ensemble_kind = ensemble.unwrap_or_else(|| "sphere".into());
            let ensemble = match ensemble_kind.as_str() {
                "ar" => {
                    let phi = match phi {
                        Some(list) => parse_list(&list).map_err(CliError::invalid)?,
                        None => Vec::new(),
                    };
                    Ensemble::Ar { phi, p_x: r.channel.p_x() }
                }
                "sphere" => Ensemble::TypeClass { gamma: vec![r.channel.p_x()], epsilon },
                "type-class" => {
                    let mut g = vec![r.channel.p_x()];
                    if let Some(list) = gamma {
                        g.extend(parse_list(&list).map_err(CliError::invalid)?);
                    }
                    Ensemble::TypeClass { gamma: g, epsilon }
                }
                other => return Err(CliError::invalid(format!("unknown ensemble `{other}`"))),
            };
            let decoder_kind = decoder.unwrap_or_else(|| "metric".into());
            let decoder = match decoder_kind.as_str() {
                "metric" => {
                    let alpha = r.file.list_or(alpha.as_deref(), "alpha", Some(&[1.0]))?;
                    Decoder::Metric { alpha }
                }
                "glrt" => Decoder::Glrt,
                other => return Err(CliError::invalid(format!("unknown decoder `{other}`"))),
            };
            let cfg = SimConfig { n, rate, ensemble, decoder, trials, seed };
            let start = Instant::now();
            let result = simulate_error_prob(&cfg, &r.channel)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let doc = json!({
                "command": "simulate",
                "config": { "channel": r.echo, "sim": cfg },
                "result": result,
                "wall_time_ms": wall_ms,
            });
            write_output(r.out.as_deref(), &render_json(doc))
        }
        Cmd::ReproduceFigure { common, figure } => {
            let (spec, default_h) = figure_preset(figure)?;
            let r = common.resolve(Some(&default_h))?;
            let spec = SweepSpec { channel: r.channel.clone(), ..spec };
            let rows = sweep_rates(&spec, &r.cfg);
            eprintln!(
                "{}",
                render_json(
                    json!({ "command": "reproduce-figure", "figure": figure, "config": r.echo })
                )
            );
            write_output(r.out.as_deref(), &sweep_to_csv(&spec.axis, &rows))
        }
    }
}

fn exponent_output(
    r: &Resolved,
    command: &str,
    alpha0: Option<f64>,
    rate: Option<f64>,
    rates: Option<&str>,
) -> Result<(), CliError> {
    match (rate, rates) {
        (Some(_), Some(_)) => Err(CliError::invalid("--rate and --rates are mutually exclusive")),
        (None, Some(list)) => {
            let rates = parse_list(list).map_err(CliError::invalid)?;
            let rows = exponent_curve(&r.channel, alpha0, &rates, &r.cfg);
            eprintln!(
                "{}",
                render_json(json!({ "command": command, "config": r.echo, "alpha0": alpha0 }))
            );
            write_output(r.out.as_deref(), &exponent_curve_to_csv(&rows, &rates))
        }
        (rate, None) => {
            let rate = rate.unwrap_or(0.0);
            let result = match alpha0 {
                Some(a0) => error_exponent(&r.channel, a0, rate, &r.cfg)?,
                None => error_exponent_universal(&r.channel, rate, &r.cfg)?,
            };
            let doc = json!({
                "command": command,
                "config": r.echo,
                "alpha0": alpha0,
                "result": result,
            });
            write_output(r.out.as_deref(), &render_json(doc))
        }
    }
}

fn emit_rate_json(
    r: &Resolved,
    command: &str,
    extra: Value,
    result: &misi::rates::RateResult,
) -> Result<(), CliError> {
    let mut doc = json!({
        "command": command,
        "config": r.echo,
        "metric": extra,
        "result": result,
    });
    if r.bits {
        doc["rate_bits"] = json!(result.rate / std::f64::consts::LN_2);
    }
    write_output(r.out.as_deref(), &render_json(doc))
}

fn parse_axis(axis: &str) -> Result<SweepAxis, CliError> {
    let err = || CliError::invalid(format!("axis must look like alpha_1 or h_0, got `{axis}`"));
    let (kind, idx) = axis.rsplit_once('_').ok_or_else(err)?;
    let idx: usize = idx.parse().map_err(|_| err())?;
    match kind {
        "alpha" => Ok(SweepAxis::MetricTap(idx)),
        "h" => Ok(SweepAxis::ChannelTap(idx)),
        _ => Err(err()),
    }
}

fn parse_ensembles(text: &str) -> Result<Vec<EnsembleSpec>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            if name == "gaussian-iid" {
                return Ok(EnsembleSpec::GaussianIid);
            }
            if let Some(p) = name.strip_prefix("ar-p") {
                let p =
                    p.parse().map_err(|_| CliError::invalid(format!("bad ensemble `{name}`")))?;
                return Ok(EnsembleSpec::Ar { p });
            }
            if let Some(p) = name.strip_prefix("fc-p") {
                let p =
                    p.parse().map_err(|_| CliError::invalid(format!("bad ensemble `{name}`")))?;
                return Ok(EnsembleSpec::FixedComposition { p });
            }
            Err(CliError::invalid(format!(
                "unknown ensemble `{name}` (expected gaussian-iid, ar-pN or fc-pN)"
            )))
        })
        .collect()
}

fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Built-in sweep scenarios matching the reference figures.
fn figure_preset(figure: u8) -> Result<(SweepSpec, Vec<f64>), CliError> {
    let sqrt_fifth = 1.0 / 5.0_f64.sqrt();
    let all = vec![
        EnsembleSpec::FixedComposition { p: 1 },
        EnsembleSpec::FixedComposition { p: 0 },
        EnsembleSpec::Ar { p: 1 },
        EnsembleSpec::GaussianIid,
    ];
    let (h, metric, axis, values, ensembles) = match figure {
        1 => (
            vec![1.0],
            vec![1.0],
            SweepAxis::MetricTap(0),
            linspace(0.2, 3.0, 29),
            vec![EnsembleSpec::FixedComposition { p: 0 }, EnsembleSpec::GaussianIid],
        ),
        2 => (
            vec![SQRT_HALF, SQRT_HALF],
            vec![SQRT_HALF, 0.0],
            SweepAxis::MetricTap(1),
            linspace(0.0, 1.5, 41),
            all,
        ),
        3 => (
            vec![2.0 * sqrt_fifth, sqrt_fifth],
            vec![1.0, 1.0],
            SweepAxis::MetricTap(0),
            linspace(0.2, 2.0, 37),
            all,
        ),
        5 => (
            vec![SQRT_HALF, SQRT_HALF, SQRT_HALF],
            vec![1.0],
            SweepAxis::MetricTap(0),
            linspace(0.2, 2.0, 37),
            all,
        ),
        other => {
            return Err(CliError::invalid(format!(
                "no preset for figure {other}; available: 1, 2, 3, 5"
            )))
        }
    };
    let channel = ChannelModel::new(h.clone(), 1.0, 1.0)?;
    let metric = DecoderMetric::new(metric)?;
    Ok((SweepSpec { channel, metric, axis, values, ensembles }, h))
}

/// Serializes with every float rounded to 10 significant digits so output
/// files are byte-identical across runs.
fn render_json(mut doc: Value) -> String {
    round_floats(&mut doc);
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON serialization cannot fail");
    text.push('\n');
    text
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    let rounded = format!("{f:.9e}").parse::<f64>().unwrap_or(f);
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *v = Value::Number(num);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn write_output(path: Option<&std::path::Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
