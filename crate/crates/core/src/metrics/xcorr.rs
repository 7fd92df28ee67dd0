use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::SignalSeries;

/// Linear cross-correlation over all `2n − 1` lags.
///
/// `values[i]` is the value at lag `i as isize − (n − 1)`, where the value at
/// lag `L` is `Σ_t u[t]·a[t + L]` over the indices where both exist.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    n: usize,
    values: Vec<f64>,
}

impl CrossCorrelation {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_lag(&self) -> isize {
        -(self.n as isize - 1)
    }

    pub fn max_lag(&self) -> isize {
        self.n as isize - 1
    }

    pub fn lags(&self) -> impl Iterator<Item = isize> {
        self.min_lag()..=self.max_lag()
    }

    pub fn at(&self, lag: isize) -> Option<f64> {
        let i = lag - self.min_lag();
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    /// Largest |X| over all lags.
    pub fn peak_magnitude(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Values summed over lags congruent modulo `period` samples; entry `r`
    /// collects every lag `L` with `L mod period == r`. For a record of whole
    /// periods this is the circular correlation scaled by the period count.
    pub fn folded(&self, period: usize) -> Vec<f64> {
        assert!(period > 0, "fold period must be positive");
        let mut out = vec![0.0; period];
        for (lag, v) in self.lags().zip(&self.values) {
            out[lag.rem_euclid(period as isize) as usize] += v;
        }
        out
    }

    /// Lag of the largest signed value within `lo < L <= hi`; the first such
    /// lag wins ties.
    pub fn argmax_in(&self, lo: isize, hi: isize) -> Option<isize> {
        let lo = (lo + 1).max(self.min_lag());
        let hi = hi.min(self.max_lag());
        (lo..=hi)
            .fold(None, |best: Option<(isize, f64)>, lag| {
                let v = self.at(lag).unwrap_or(f64::NEG_INFINITY);
                match best {
                    Some((_, bv)) if bv >= v => best,
                    _ => Some((lag, v)),
                }
            })
            .map(|(lag, _)| lag)
    }
}

/// FFT-based cross-correlation of equal-length, equal-rate series.
pub fn cross_correlate(u: &SignalSeries, a: &SignalSeries) -> Result<CrossCorrelation> {
    if u.len() != a.len() {
        return Err(Error::Mismatch(format!(
            "lengths differ: {} vs {}",
            u.len(),
            a.len()
        )));
    }
    if u.rate_hz() != a.rate_hz() {
        return Err(Error::Mismatch(format!(
            "rates differ: {} vs {} Hz",
            u.rate_hz(),
            a.rate_hz()
        )));
    }
    let n = u.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty series".into()));
    }
    let m = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);

    let padded = |x: &[f64]| -> Vec<Complex<f64>> {
        let mut v: Vec<Complex<f64>> = x.iter().map(|&r| Complex::new(r, 0.0)).collect();
        v.resize(m, Complex::new(0.0, 0.0));
        v
    };
    let mut fu = padded(u.samples());
    let mut fa = padded(a.samples());
    fwd.process(&mut fu);
    fwd.process(&mut fa);
    let mut prod: Vec<Complex<f64>> = fu.iter().zip(&fa).map(|(x, y)| x.conj() * y).collect();
    inv.process(&mut prod);

    let scale = 1.0 / m as f64;
    let values = (-(n as isize - 1)..=(n as isize - 1))
        .map(|lag| {
            let idx = if lag < 0 {
                (m as isize + lag) as usize
            } else {
                lag as usize
            };
            prod[idx].re * scale
        })
        .collect();
    Ok(CrossCorrelation { n, values })
}
