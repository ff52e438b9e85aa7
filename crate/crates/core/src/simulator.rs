//! Desk-scale Monte Carlo of the actual coding system: random codebooks,
//! the ISI channel with a zero prefix, exhaustive metric or correlation
//! decoding, and error-frequency estimation with Wilson intervals.
//!
//! Trials are driven by independent ChaCha streams keyed by (seed, trial
//! index), so results do not depend on scheduling and runs are exactly
//! reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::Serialize;

use crate::armodel::{ar_from_autocov, eta_squared, require_stable, AutocovVector};
use crate::channel::ChannelModel;
use crate::{Error, Result};

/// Hard cap on the codebook size: exhaustive decoding only.
pub const MAX_CODEWORDS: u64 = 1 << 20;

/// Codeword ensembles the simulator can draw from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Ensemble {
    /// AR recursion with zero initial state; order zero is white Gaussian.
    Ar { phi: Vec<f64>, p_x: f64 },
    /// Uniform over the type class of sequences whose empirical lag
    /// autocovariances match `gamma` within `epsilon`. Order zero is the
    /// exact power sphere; higher orders are rejection-sampled stationary
    /// Gaussians.
    TypeClass { gamma: Vec<f64>, epsilon: f64 },
}

/// Decoding rules available to the simulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Decoder {
    /// Mismatched ISI metric: pick the codeword minimizing
    /// `sum_t (y_t - sum_i alpha_i x_{t-i})^2`.
    Metric { alpha: Vec<f64> },
    /// Universal correlation rule: pick the codeword maximizing
    /// `|sum_t x_t y_t|`.
    Glrt,
}

/// A complete simulation request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    /// Block length.
    pub n: usize,
    /// Rate in nats; the codebook holds `ceil(e^{nR})` codewords.
    pub rate: f64,
    pub ensemble: Ensemble,
    pub decoder: Decoder,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    /// `M = ceil(e^{nR})`.
    pub fn num_codewords(&self) -> u64 {
        (self.n as f64 * self.rate).exp().ceil() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidInput("need n >= 1 and trials >= 1".into()));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidInput(format!("rate must be >= 0, got {}", self.rate)));
        }
        let m = self.num_codewords();
        if m > MAX_CODEWORDS {
            return Err(Error::InvalidInput(format!(
                "codebook of {m} codewords exceeds the desk-scale cap of {MAX_CODEWORDS}; \
                 lower n or the rate"
            )));
        }
        match &self.decoder {
            Decoder::Metric { alpha } => {
                if alpha.is_empty() || alpha.iter().all(|&a| a == 0.0) {
                    return Err(Error::InvalidInput("metric taps must not all be zero".into()));
                }
            }
            Decoder::Glrt => {}
        }
        Ok(())
    }
}

/// Error estimate with a Wilson 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub error_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
    pub errors: usize,
    pub seed: u64,
}

/// An ensemble with its derived sampling parameters resolved once.
pub struct PreparedEnsemble {
    kind: Ensemble,
    /// AR coefficients and innovation std deviation used by the recursion.
    phi: Vec<f64>,
    eta: f64,
    /// Cholesky factor (lower triangle) of the order-p Toeplitz head, for
    /// stationary initialization of type-class sampling.
    init_chol: Vec<Vec<f64>>,
}

impl PreparedEnsemble {
    pub fn new(ensemble: &Ensemble) -> Result<Self> {
        match ensemble {
            Ensemble::Ar { phi, p_x } => {
                require_stable(phi)?;
                let eta2 = eta_squared(phi, *p_x, 1024)?;
                Ok(PreparedEnsemble {
                    kind: ensemble.clone(),
                    phi: phi.clone(),
                    eta: eta2.sqrt(),
                    init_chol: Vec::new(),
                })
            }
            Ensemble::TypeClass { gamma, epsilon } => {
                if !epsilon.is_finite() || *epsilon <= 0.0 {
                    return Err(Error::InvalidInput("epsilon must be positive".into()));
                }
                let gamma = AutocovVector::new(gamma.clone())?;
                let params = ar_from_autocov(&gamma)?;
                let p = gamma.max_lag();
                let init_chol = if p >= 1 {
                    cholesky_toeplitz(&gamma.gamma()[..p])?
                } else {
                    Vec::new()
                };
                Ok(PreparedEnsemble {
                    kind: ensemble.clone(),
                    phi: params.phi().to_vec(),
                    eta: params.eta2().sqrt(),
                    init_chol,
                })
            }
        }
    }

    /// Draws one codeword of length `n`.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        match &self.kind {
            Ensemble::Ar { .. } => Ok(self.sample_ar_zero_init(n, rng)),
            Ensemble::TypeClass { gamma, epsilon } => {
                let p = gamma.len() - 1;
                if p == 0 {
                    Ok(sample_sphere(gamma[0], n, rng))
                } else {
                    self.sample_type_class(gamma, *epsilon, n, rng)
                }
            }
        }
    }

    fn sample_ar_zero_init(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for t in 0..n {
            let mut v = self.eta * rng.sample::<f64, _>(StandardNormal);
            for (i, &c) in self.phi.iter().enumerate() {
                if t > i {
                    v += c * x[t - 1 - i];
                }
            }
            x[t] = v;
        }
        x
    }

    /// Stationary Gaussian with the target autocovariance, retried until
    /// the empirical composition lands inside the tolerance band.
    fn sample_type_class(
        &self,
        gamma: &[f64],
        epsilon: f64,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        let p = gamma.len() - 1;
        const MAX_ATTEMPTS: usize = 100_000;
        for _ in 0..MAX_ATTEMPTS {
            let mut x = vec![0.0; n];
            // Exact stationary start for the first p samples.
            let head = p.min(n);
            let z: Vec<f64> = (0..head).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for (i, xi) in x.iter_mut().enumerate().take(head) {
                *xi = (0..=i).map(|j| self.init_chol[i][j] * z[j]).sum();
            }
            for t in head..n {
                let mut v = self.eta * rng.sample::<f64, _>(StandardNormal);
                for (i, &c) in self.phi.iter().enumerate() {
                    v += c * x[t - 1 - i];
                }
                x[t] = v;
            }
            if composition_ok(&x, gamma, epsilon) {
                return Ok(x);
            }
        }
        Err(Error::Infeasible(format!(
            "type-class rejection sampling failed over {MAX_ATTEMPTS} attempts; \
             increase epsilon or the block length"
        )))
    }
}

/// Empirical lag products with a zero prefix, compared against the target.
fn composition_ok(x: &[f64], gamma: &[f64], epsilon: f64) -> bool {
    let n = x.len() as f64;
    for (k, &target) in gamma.iter().enumerate() {
        let mut acc = 0.0;
        for t in k..x.len() {
            acc += x[t] * x[t - k];
        }
        if (acc / n - target).abs() >= epsilon {
            return false;
        }
    }
    true
}

/// Gaussian vector scaled onto the sphere `||x||^2 = n p_x` exactly.
fn sample_sphere(p_x: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm_sq: f64 = x.iter().map(|v| v * v).sum();
    let scale = (n as f64 * p_x / norm_sq).sqrt();
    x.iter_mut().for_each(|v| *v *= scale);
    x
}

fn cholesky_toeplitz(head: &[f64]) -> Result<Vec<Vec<f64>>> {
    let p = head.len();
    let mut l = vec![vec![0.0_f64; p]; p];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = head[i - j];
            for (lik, ljk) in l[i][..j].iter().zip(&l[j][..j]) {
                sum -= lik * ljk;
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::NotPositiveDefinite { minor: i + 1 });
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// One convenience draw; the simulator proper prepares the ensemble once.
pub fn sample_codeword(ensemble: &Ensemble, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    PreparedEnsemble::new(ensemble)?.sample(n, rng)
}

/// ISI channel output with a zero prefix at the block start.
fn channel_output(h: &[f64], sigma: f64, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for t in 0..n {
        let mut v = sigma * rng.sample::<f64, _>(StandardNormal);
        for (i, &hi) in h.iter().enumerate() {
            if t >= i {
                v += hi * x[t - i];
            }
        }
        y[t] = v;
    }
    y
}

fn metric_score(decoder: &Decoder, x: &[f64], y: &[f64]) -> f64 {
    match decoder {
        Decoder::Metric { alpha } => {
            let mut acc = 0.0;
            for t in 0..y.len() {
                let mut pred = 0.0;
                for (i, &a) in alpha.iter().enumerate() {
                    if t >= i {
                        pred += a * x[t - i];
                    }
                }
                let d = y[t] - pred;
                acc -= d * d;
            }
            acc
        }
        Decoder::Glrt => {
            let mut acc = 0.0;
            for t in 0..y.len() {
                acc += x[t] * y[t];
            }
            acc.abs()
        }
    }
}

/// Spherical codewords enter the memoryless-metric and correlation scores
/// only through the projection on y and their norm; by rotation invariance
/// that pair is `(z ||y||, sqrt(z^2 + W))` with `z ~ N(0,1)` and
/// `W ~ chi^2_{n-1}` independent, so rival scores can be drawn in their
/// exact law without materializing the codeword. `a0` is the metric
/// coefficient, `None` for the correlation (GLRT) rule.
enum RivalScores {
    Generic,
    SphereProjection { a0: Option<f64> },
}

fn rival_scores(config: &SimConfig) -> RivalScores {
    let spherical = matches!(&config.ensemble, Ensemble::TypeClass { gamma, .. } if gamma.len() == 1);
    if !spherical || config.n < 2 {
        return RivalScores::Generic;
    }
    match &config.decoder {
        Decoder::Metric { alpha } if alpha[1..].iter().all(|&a| a == 0.0) => {
            RivalScores::SphereProjection { a0: Some(alpha[0]) }
        }
        Decoder::Glrt => RivalScores::SphereProjection { a0: None },
        Decoder::Metric { .. } => RivalScores::Generic,
    }
}

/// Runs the Monte Carlo: per trial a fresh codebook, one transmission of
/// the first codeword, exhaustive decoding, and a tie-counts-as-error
/// verdict.
pub fn simulate_error_prob(config: &SimConfig, channel: &ChannelModel) -> Result<SimResult> {
    config.validate()?;
    let prepared = PreparedEnsemble::new(&config.ensemble)?;
    let m = config.num_codewords() as usize;
    let n = config.n;
    let h = channel.h().to_vec();
    let sigma = channel.sigma2().sqrt();
    let scorer = rival_scores(config);

    let outcomes: Vec<Result<bool>> = crate::run_indexed(config.trials, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(trial as u64 + 1);

        let sent = prepared.sample(n, &mut rng)?;
        let y = channel_output(&h, sigma, &sent, &mut rng);
        let sent_score = metric_score(&config.decoder, &sent, &y);

        match &scorer {
            RivalScores::SphereProjection { a0 } => {
                let p_x = match &config.ensemble {
                    Ensemble::TypeClass { gamma, .. } => gamma[0],
                    Ensemble::Ar { .. } => unreachable!(),
                };
                let sent_dot: f64 = sent.iter().zip(&y).map(|(a, b)| a * b).sum();
                let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let radius = (n as f64 * p_x).sqrt();
                let chi = ChiSquared::new(n as f64 - 1.0)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?;
                for _ in 1..m {
                    let z: f64 = rng.sample(StandardNormal);
                    let w: f64 = chi.sample(&mut rng);
                    let rival_dot = radius * z * y_norm / (z * z + w).sqrt();
                    let beats = match a0 {
                        Some(a0) => a0 * rival_dot >= a0 * sent_dot,
                        None => rival_dot.abs() >= sent_dot.abs(),
                    };
                    if beats {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            RivalScores::Generic => {
                // Competing codewords are drawn one at a time; only their
                // scores are kept.
                for _ in 1..m {
                    let rival = prepared.sample(n, &mut rng)?;
                    if metric_score(&config.decoder, &rival, &y) >= sent_score {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    });

    let mut errors = 0usize;
    for o in outcomes {
        if o? {
            errors += 1;
        }
    }
    let (ci_low, ci_high) = wilson_interval(errors, config.trials);
    Ok(SimResult {
        error_prob: errors as f64 / config.trials as f64,
        ci_low,
        ci_high,
        trials: config.trials,
        errors,
        seed: config.seed,
    })
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The interval always contains the estimate; rounding must not break that.
    (((center - half).max(0.0)).min(p), ((center + half).min(1.0)).max(p))
}
