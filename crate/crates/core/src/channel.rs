//! The channel and decoder-metric descriptions shared by every evaluator.

use serde::Serialize;

use crate::spectra::TapVector;
use crate::{Error, Result};

/// A K-tap Gaussian ISI channel `y_t = sum_i h_i x_{t-i} + w_t` with noise
/// variance `sigma2` and input power constraint `p_x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelModel {
    h: Vec<f64>,
    sigma2: f64,
    p_x: f64,
}

impl ChannelModel {
    pub fn new(h: Vec<f64>, sigma2: f64, p_x: f64) -> Result<Self> {
        let taps = TapVector::new(h)?;
        if taps.norm_sq() == 0.0 {
            return Err(Error::InvalidInput("channel taps are all zero".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!("noise variance must be positive, got {sigma2}")));
        }
        if !(p_x > 0.0 && p_x.is_finite()) {
            return Err(Error::InvalidInput(format!("input power must be positive, got {p_x}")));
        }
        Ok(ChannelModel { h: taps.coeffs().to_vec(), sigma2, p_x })
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Channel memory K (number of taps minus one).
    pub fn memory(&self) -> usize {
        self.h.len() - 1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn tap_norm_sq(&self) -> f64 {
        crate::spectra::norm_sq(&self.h)
    }
}

/// The decoder's assumed ISI taps. A metric shorter than the channel is
/// padded with zeros, one longer pads the channel instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoderMetric {
    alpha: Vec<f64>,
}

impl DecoderMetric {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        let taps = TapVector::new(alpha)?;
        if taps.norm_sq() == 0.0 {
            return Err(Error::InvalidInput("metric taps are all zero".into()));
        }
        Ok(DecoderMetric { alpha: taps.coeffs().to_vec() })
    }

    /// Memoryless metric with the single coefficient `alpha0`.
    pub fn memoryless(alpha0: f64) -> Result<Self> {
        DecoderMetric::new(vec![alpha0])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// True if no tap beyond index zero is active.
    pub fn is_memoryless(&self) -> bool {
        self.alpha[1..].iter().all(|&a| a == 0.0)
    }

    /// Taps padded with zeros to length `len`.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut a = self.alpha.clone();
        a.resize(len.max(a.len()), 0.0);
        a
    }
}

/// Pads the shorter of channel and metric with zeros so both share one
/// memory length.
pub fn common_taps(channel: &ChannelModel, metric: &DecoderMetric) -> (Vec<f64>, Vec<f64>) {
    let len = channel.h().len().max(metric.alpha().len());
    let mut h = channel.h().to_vec();
    h.resize(len, 0.0);
    (h, metric.padded(len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(ChannelModel::new(vec![], 1.0, 1.0).is_err());
        assert!(ChannelModel::new(vec![0.0], 1.0, 1.0).is_err());
        assert!(ChannelModel::new(vec![1.0], 0.0, 1.0).is_err());
        assert!(ChannelModel::new(vec![1.0], 1.0, -1.0).is_err());
        assert!(DecoderMetric::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn padding_aligns_lengths() {
        let ch = ChannelModel::new(vec![1.0, 0.5, 0.25], 1.0, 1.0).unwrap();
        let m = DecoderMetric::memoryless(2.0).unwrap();
        let (h, a) = common_taps(&ch, &m);
        assert_eq!(h, vec![1.0, 0.5, 0.25]);
        assert_eq!(a, vec![2.0, 0.0, 0.0]);
        assert!(m.is_memoryless());
    }
}
