use std::f64::consts::PI;

use super::xcorr::cross_correlate;
use crate::error::{Error, Result};
use crate::plant::AnthropometricModel;
use crate::signal::SignalSeries;

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Drops `periods` leading stimulus periods, then truncates the tail to a
/// whole number of periods.
pub fn trim_steady_state(series: &SignalSeries, periods: usize) -> Result<SignalSeries> {
    let per = series
        .samples_per_period()
        .ok_or_else(|| Error::InsufficientData("series has no stimulus period".into()))?;
    if per == 0 {
        return Err(Error::InsufficientData(
            "stimulus period is shorter than one sample".into(),
        ));
    }
    let skip = periods * per;
    let remaining = series.len().saturating_sub(skip);
    let whole = remaining / per;
    if whole == 0 {
        return Err(Error::InsufficientData(format!(
            "{} samples leave less than one {per}-sample period after discarding {periods}",
            series.len()
        )));
    }
    let kept = series.samples()[skip..skip + whole * per].to_vec();
    SignalSeries::new(kept, series.rate_hz(), series.period_s())
}

fn input_energy(u: &SignalSeries) -> Result<f64> {
    let e: f64 = u.samples().iter().map(|x| x * x).sum();
    if e <= 0.0 {
        return Err(Error::InsufficientData("input has zero energy".into()));
    }
    Ok(e)
}

/// `G = max_L |X(L)| / Σ u²`.
pub fn gain(u: &SignalSeries, a: &SignalSeries) -> Result<f64> {
    let energy = input_energy(u)?;
    let x = cross_correlate(u, a)?;
    Ok(x.peak_magnitude() / energy)
}

/// Phase of `a` relative to `u` from the correlation peak.
///
/// The correlation is folded modulo one stimulus period of `p` samples and
/// its peak lag is searched in `−p/2 < L ≤ p/2`, then mapped to
/// `φ = −2π·L / p`, so a response that lags the input has negative phase.
/// Folding removes the overlap taper of the linear correlation, which would
/// otherwise pull the peak towards zero lag. The result is in (−π, π].
pub fn phase(u: &SignalSeries, a: &SignalSeries) -> Result<f64> {
    input_energy(u)?;
    if u.period_s().is_none() {
        return Err(Error::InsufficientData(
            "phase needs the stimulus period".into(),
        ));
    }
    let per = u.samples_per_period().unwrap_or(0);
    if per == 0 {
        return Err(Error::InsufficientData(
            "stimulus period is shorter than one sample".into(),
        ));
    }
    let folded = cross_correlate(u, a)?.folded(per);
    let half = per as isize / 2;
    let lo = -((per as isize - 1) / 2);
    let mut best = (0isize, f64::NEG_INFINITY);
    for lag in lo..=half {
        let v = folded[lag.rem_euclid(per as isize) as usize];
        if v > best.1 {
            best = (lag, v);
        }
    }
    Ok(wrap_angle(-2.0 * PI * best.0 as f64 / per as f64))
}

/// Mean squared sway, rad².
pub fn power(a: &SignalSeries) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    Ok(a.samples().iter().map(|x| x * x).sum::<f64>() / a.len() as f64)
}

/// Torque divided by the model's m·g·h.
pub fn normalize_torque(
    torque: &SignalSeries,
    model: &AnthropometricModel,
) -> Result<SignalSeries> {
    let mgh = model.mgh();
    if !(mgh.is_finite() && mgh > 0.0) {
        return Err(Error::param("mgh", format!("must be > 0, got {mgh}")));
    }
    SignalSeries::new(
        torque.samples().iter().map(|t| t / mgh).collect(),
        torque.rate_hz(),
        torque.period_s(),
    )
}
