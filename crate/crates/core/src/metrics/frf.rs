use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::scores::wrap_angle;
use crate::error::{Error, Result};
use crate::signal::SignalSeries;

/// Gain, phase and coherence of a response at the stimulus frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrfResult {
    pub frequencies_hz: Vec<f64>,
    pub gain: Vec<f64>,
    /// rad, (−π, π]
    pub phase: Vec<f64>,
    pub coherence: Vec<f64>,
}

impl FrfResult {
    pub fn len(&self) -> usize {
        self.frequencies_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies_hz.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.frequencies_hz.len();
        if self.gain.len() != n || self.phase.len() != n || self.coherence.len() != n {
            return Err(Error::Mismatch("FRF arrays differ in length".into()));
        }
        for (i, &c) in self.coherence.iter().enumerate() {
            if !(-1e-9..=1.0 + 1e-9).contains(&c) {
                return Err(Error::param(
                    "coherence",
                    format!("entry {i} = {c} outside [0, 1]"),
                ));
            }
        }
        if self.gain.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::param("gain", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Per-period DFT of `x` at bin `k` of an `n`-sample period.
fn period_components(x: &[f64], n: usize, k: usize) -> Vec<Complex<f64>> {
    let w = -2.0 * PI * k as f64 / n as f64;
    x.chunks_exact(n)
        .map(|period| {
            period
                .iter()
                .enumerate()
                .map(|(j, &v)| Complex::from_polar(v, w * j as f64))
                .sum()
        })
        .collect()
}

/// Frequency response of `a` to `u` at harmonics of the stimulus period.
///
/// Both series must be trimmed to the same whole number (at least two) of
/// stimulus periods. Gain and phase compare the period-averaged Fourier
/// components; coherence is `|⟨U*·A⟩|² / (⟨|U|²⟩·⟨|A|²⟩)` over periods.
pub fn estimate_frf(
    u: &SignalSeries,
    a: &SignalSeries,
    frequencies_hz: &[f64],
) -> Result<FrfResult> {
    if u.len() != a.len() || u.rate_hz() != a.rate_hz() {
        return Err(Error::Mismatch(
            "input and response differ in length or rate".into(),
        ));
    }
    let period = u
        .period_s()
        .ok_or_else(|| Error::InsufficientData("FRF needs the stimulus period".into()))?;
    let n = u.samples_per_period().unwrap_or(0);
    if n == 0 {
        return Err(Error::InsufficientData(
            "stimulus period is shorter than one sample".into(),
        ));
    }
    let periods = u.len() / n;
    if periods < 2 || !u.len().is_multiple_of(n) {
        return Err(Error::InsufficientData(format!(
            "coherence needs a whole number of at least 2 periods, got {} samples of {n}",
            u.len()
        )));
    }
    let mut out = FrfResult {
        frequencies_hz: Vec::with_capacity(frequencies_hz.len()),
        gain: Vec::new(),
        phase: Vec::new(),
        coherence: Vec::new(),
    };
    for &f in frequencies_hz {
        let harmonic = f * period;
        let k = harmonic.round();
        if !(f > 0.0)
            || (harmonic - k).abs() > 1e-6 * harmonic.max(1.0)
            || k < 1.0
            || k as usize >= n.div_ceil(2)
        {
            return Err(Error::param(
                "frequency",
                format!("{f} Hz is not a resolvable harmonic of the {period} s period"),
            ));
        }
        let k = k as usize;
        let uc = period_components(u.samples(), n, k);
        let ac = period_components(a.samples(), n, k);
        let count = periods as f64;
        let mean_u: Complex<f64> = uc.iter().sum::<Complex<f64>>() / count;
        let mean_a: Complex<f64> = ac.iter().sum::<Complex<f64>>() / count;
        let period_energy = u.samples().iter().map(|x| x * x).sum::<f64>() / count;
        if mean_u.norm() <= 1e-9 * (n as f64 * period_energy).sqrt() {
            return Err(Error::InsufficientData(format!(
                "input has no energy at {f} Hz"
            )));
        }
        let cross: Complex<f64> = uc
            .iter()
            .zip(&ac)
            .map(|(x, y)| x.conj() * y)
            .sum::<Complex<f64>>()
            / count;
        let pu: f64 = uc.iter().map(|x| x.norm_sqr()).sum::<f64>() / count;
        let pa: f64 = ac.iter().map(|x| x.norm_sqr()).sum::<f64>() / count;
        let coherence = if pa > 0.0 {
            cross.norm_sqr() / (pu * pa)
        } else {
            0.0
        };

        out.frequencies_hz.push(f);
        out.gain.push(mean_a.norm() / mean_u.norm());
        out.phase.push(wrap_angle(mean_a.arg() - mean_u.arg()));
        out.coherence.push(coherence);
    }
    Ok(out)
}

/// Harmonics of the stimulus period whose period-averaged amplitude is at
/// least `min_relative` of the strongest one, up to `max_hz`.
pub fn stimulus_harmonics(u: &SignalSeries, min_relative: f64, max_hz: f64) -> Result<Vec<f64>> {
    let period = u
        .period_s()
        .ok_or_else(|| Error::InsufficientData("stimulus has no period".into()))?;
    let n = u.samples_per_period().unwrap_or(0);
    if n < 3 || u.len() < n {
        return Err(Error::InsufficientData(
            "stimulus shorter than one period".into(),
        ));
    }
    let periods = u.len() / n;
    let mut mean = vec![0.0; n];
    for chunk in u.samples().chunks_exact(n) {
        for (m, x) in mean.iter_mut().zip(chunk) {
            *m += x / periods as f64;
        }
    }
    let mut buf: Vec<Complex<f64>> = mean.iter().map(|&x| Complex::new(x, 0.0)).collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let top = (1..n.div_ceil(2))
        .filter(|&k| k as f64 / period <= max_hz)
        .collect::<Vec<_>>();
    let peak = top.iter().map(|&k| buf[k].norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::InsufficientData(
            "stimulus carries no periodic energy".into(),
        ));
    }
    Ok(top
        .into_iter()
        .filter(|&k| buf[k].norm() >= min_relative * peak)
        .map(|k| k as f64 / period)
        .collect())
}

/// Weights of the log-gain and phase terms of the likeness distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikenessWeights {
    pub log_gain: f64,
    pub phase: f64,
}

impl Default for LikenessWeights {
    fn default() -> Self {
        Self {
            log_gain: 1.0,
            phase: 1.0,
        }
    }
}

/// Weighted RMS over frequencies of log-gain and wrapped phase differences.
pub fn compare_to_reference(
    frf: &FrfResult,
    reference: &FrfResult,
    weights: LikenessWeights,
) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::InsufficientData("reference FRF is empty".into()));
    }
    frf.validate()?;
    reference.validate()?;
    let same_grid = frf.len() == reference.len()
        && frf
            .frequencies_hz
            .iter()
            .zip(&reference.frequencies_hz)
            .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
    if !same_grid {
        return Err(Error::Mismatch("FRF frequency grids differ".into()));
    }
    if !(weights.log_gain >= 0.0 && weights.phase >= 0.0) {
        return Err(Error::param("weights", "must be >= 0"));
    }
    let mut acc = 0.0;
    for i in 0..frf.len() {
        let (g1, g2) = (frf.gain[i], reference.gain[i]);
        if g1 <= 0.0 || g2 <= 0.0 {
            return Err(Error::param(
                "gain",
                "log-gain distance needs positive gains",
            ));
        }
        let dg = g1.ln() - g2.ln();
        let dp = wrap_angle(frf.phase[i] - reference.phase[i]);
        acc += weights.log_gain * dg * dg + weights.phase * dp * dp;
    }
    Ok((acc / frf.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multisine(harmonics: &[usize], periods: usize) -> SignalSeries {
        let n = 1000;
        let s = (0..n * periods)
            .map(|j| {
                harmonics
                    .iter()
                    .map(|&h| (2.0 * PI * h as f64 * j as f64 / n as f64 + h as f64).sin())
                    .sum()
            })
            .collect();
        SignalSeries::new(s, 100.0, Some(10.0)).unwrap()
    }

    #[test]
    fn identity_response() {
        let u = multisine(&[1, 3, 7], 4);
        let r = estimate_frf(&u, &u, &[0.1, 0.3, 0.7]).unwrap();
        for i in 0..3 {
            assert!((r.gain[i] - 1.0).abs() < 1e-12);
            assert!(r.phase[i].abs() < 1e-12);
            assert!((r.coherence[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_unresolvable_or_short() {
        let u = multisine(&[1], 4);
        assert!(estimate_frf(&u, &u, &[0.15]).is_err());
        assert!(estimate_frf(&u, &u, &[0.2]).is_err()); // harmonic 2 carries no energy
        let one = multisine(&[1], 1);
        assert!(estimate_frf(&one, &one, &[0.1]).is_err());
    }

    #[test]
    fn picks_excited_harmonics() {
        let u = multisine(&[1, 3, 7], 2);
        let h = stimulus_harmonics(&u, 0.1, 50.0).unwrap();
        assert_eq!(h.len(), 3);
        assert!((h[0] - 0.1).abs() < 1e-12 && (h[2] - 0.7).abs() < 1e-12);
        assert_eq!(stimulus_harmonics(&u, 0.1, 0.5).unwrap().len(), 2);
    }

    #[test]
    fn likeness_distance() {
        let a = FrfResult {
            frequencies_hz: vec![0.1, 0.2],
            gain: vec![1.0, 0.5],
            phase: vec![0.0, -0.3],
            coherence: vec![1.0, 0.9],
        };
        let w = LikenessWeights::default();
        assert_eq!(compare_to_reference(&a, &a, w).unwrap(), 0.0);
        let mut b = a.clone();
        b.gain = vec![2.0, 1.0];
        let d = compare_to_reference(
            &b,
            &a,
            LikenessWeights {
                log_gain: 1.0,
                phase: 0.0,
            },
        )
        .unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-12);
        let mut c = a.clone();
        c.frequencies_hz = vec![0.1, 0.25];
        assert!(compare_to_reference(&c, &a, w).is_err());
        let empty = FrfResult {
            frequencies_hz: vec![],
            gain: vec![],
            phase: vec![],
            coherence: vec![],
        };
        assert!(compare_to_reference(&a, &empty, w).is_err());
    }
}
