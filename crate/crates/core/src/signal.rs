//! Uniformly sampled real-valued time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled signal, optionally tagged with the fundamental period
/// of the stimulus that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    samples: Vec<f64>,
    rate_hz: f64,
    period_s: Option<f64>,
}

impl SignalSeries {
    pub fn new(samples: Vec<f64>, rate_hz: f64, period_s: Option<f64>) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::param(
                "rate_hz",
                format!("must be > 0, got {rate_hz}"),
            ));
        }
        if let Some(p) = period_s {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::param("period_s", format!("must be > 0, got {p}")));
            }
        }
        if let Some(k) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(
                "samples",
                format!("non-finite value at index {k}"),
            ));
        }
        Ok(Self {
            samples,
            rate_hz,
            period_s,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn period_s(&self) -> Option<f64> {
        self.period_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate_hz
    }

    /// Number of whole samples in one stimulus period, if a period is known.
    pub fn samples_per_period(&self) -> Option<usize> {
        self.period_s.map(|p| (p * self.rate_hz).round() as usize)
    }

    pub fn with_period(mut self, period_s: Option<f64>) -> Result<Self> {
        if let Some(p) = period_s {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::param("period_s", format!("must be > 0, got {p}")));
            }
        }
        self.period_s = period_s;
        Ok(self)
    }

    /// Element-wise scaling; keeps rate and period.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * k).collect(),
            rate_hz: self.rate_hz,
            period_s: self.period_s,
        }
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}
