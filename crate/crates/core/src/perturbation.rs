//! Support-surface perturbation profiles.
//!
//! Every generator is a pure function of its arguments: identical arguments
//! give bit-identical sample vectors. Angles are radians, translations metres.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SignalSeries;

/// Minimum number of samples per stimulus cycle accepted by [`gen_sine`].
pub const MIN_SAMPLES_PER_CYCLE: f64 = 20.0;

/// Default PRTS register length.
pub const DEFAULT_PRTS_STAGES: u32 = 5;

/// Default hold time of one PRTS state.
pub const DEFAULT_PRTS_STATE_DURATION_S: f64 = 0.25;

/// Feedback coefficients `c_0 .. c_{n-1}` of a primitive polynomial
/// `x^n + c_{n-1} x^{n-1} + ... + c_0` over GF(3), indexed by `n - 2`.
///
/// Each entry was found by exhaustive search (lowest weight, then
/// lexicographically first) and is checked by `every_tap_set_is_maximal`.
/// These are frozen: changing them changes every PRTS profile.
const PRTS_TAPS: [&[u8]; 7] = [
    &[2, 1],                   // x^2 + x + 2
    &[1, 0, 2],                // x^3 + 2x^2 + 1
    &[2, 0, 0, 1],             // x^4 + x^3 + 2
    &[1, 0, 0, 0, 2],          // x^5 + 2x^4 + 1
    &[2, 0, 0, 0, 0, 1],       // x^6 + x^5 + 2
    &[1, 0, 0, 0, 0, 2, 0],    // x^7 + 2x^5 + 1
    &[2, 0, 0, 0, 0, 1, 0, 0], // x^8 + x^5 + 2
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    #[default]
    SupportTilt,
    SupportTranslation,
}

/// A standardized perturbation, as written in trial configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationProfile {
    #[serde(default)]
    pub axis: Axis,
    #[serde(flatten)]
    pub kind: ProfileKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    Sine {
        amplitude: f64,
        frequency_hz: f64,
    },
    Prts {
        #[serde(default = "default_stages")]
        stages: u32,
        velocity: f64,
        #[serde(default = "default_state_duration")]
        state_duration_s: f64,
    },
    TiltImpulse {
        peak: f64,
        width_s: f64,
    },
    TranslationImpulse {
        peak: f64,
        width_s: f64,
    },
    Custom {
        samples: Vec<f64>,
        #[serde(default)]
        period_s: Option<f64>,
    },
}

fn default_stages() -> u32 {
    DEFAULT_PRTS_STAGES
}

fn default_state_duration() -> f64 {
    DEFAULT_PRTS_STATE_DURATION_S
}

impl PerturbationProfile {
    pub fn sine(amplitude: f64, frequency_hz: f64) -> Self {
        Self {
            axis: Axis::SupportTilt,
            kind: ProfileKind::Sine {
                amplitude,
                frequency_hz,
            },
        }
    }

    /// A profile that never moves.
    pub fn zero() -> Self {
        Self {
            axis: Axis::SupportTilt,
            kind: ProfileKind::Custom {
                samples: Vec::new(),
                period_s: None,
            },
        }
    }

    /// Checks kind-specific parameter ranges without generating samples.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ProfileKind::Sine {
                amplitude,
                frequency_hz,
            } => {
                check_amplitude(*amplitude)?;
                if !(frequency_hz.is_finite() && *frequency_hz > 0.0) {
                    return Err(Error::param("frequency_hz", "must be > 0"));
                }
            }
            ProfileKind::Prts {
                stages,
                velocity,
                state_duration_s,
            } => {
                check_stages(*stages)?;
                if !(velocity.is_finite() && *velocity > 0.0) {
                    return Err(Error::param("velocity", "must be > 0"));
                }
                if !(state_duration_s.is_finite() && *state_duration_s > 0.0) {
                    return Err(Error::param("state_duration_s", "must be > 0"));
                }
            }
            ProfileKind::TiltImpulse { peak, width_s } => {
                if self.axis != Axis::SupportTilt {
                    return Err(Error::param("axis", "tilt-impulse requires support-tilt"));
                }
                check_amplitude(*peak)?;
                if !(width_s.is_finite() && *width_s > 0.0) {
                    return Err(Error::param("width_s", "must be > 0"));
                }
            }
            ProfileKind::TranslationImpulse { peak, width_s } => {
                if self.axis != Axis::SupportTranslation {
                    return Err(Error::param(
                        "axis",
                        "translation-impulse requires support-translation",
                    ));
                }
                check_amplitude(*peak)?;
                if !(width_s.is_finite() && *width_s > 0.0) {
                    return Err(Error::param("width_s", "must be > 0"));
                }
            }
            ProfileKind::Custom { samples, period_s } => {
                if samples.iter().any(|x| !x.is_finite()) {
                    return Err(Error::param("samples", "must be finite"));
                }
                if let Some(p) = period_s {
                    if !(p.is_finite() && *p > 0.0) {
                        return Err(Error::param("period_s", "must be > 0"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Fundamental period of the stimulus, when it is periodic.
    pub fn period_s(&self, rate_hz: f64) -> Option<f64> {
        match &self.kind {
            ProfileKind::Sine { frequency_hz, .. } => Some(1.0 / frequency_hz),
            ProfileKind::Prts {
                stages,
                state_duration_s,
                ..
            } => samples_per_state(*state_duration_s, rate_hz)
                .ok()
                .map(|sps| prts_length(*stages) as f64 * sps as f64 / rate_hz),
            ProfileKind::Custom { period_s, .. } => *period_s,
            _ => None,
        }
    }

    /// Renders the profile as `round(duration_s * rate_hz)` samples.
    ///
    /// Periodic profiles are generated over whole cycles and truncated. A
    /// custom profile shorter than the record is padded with zeros.
    pub fn realize(&self, duration_s: f64, rate_hz: f64) -> Result<SignalSeries> {
        self.validate()?;
        let n = sample_count(duration_s, rate_hz)?;
        match &self.kind {
            ProfileKind::Sine {
                amplitude,
                frequency_hz,
            } => gen_sine(*amplitude, *frequency_hz, duration_s, rate_hz),
            ProfileKind::Prts {
                stages,
                velocity,
                state_duration_s,
            } => {
                let sps = samples_per_state(*state_duration_s, rate_hz)?;
                let per_cycle = prts_length(*stages) * sps;
                let cycles = n.div_ceil(per_cycle).max(1);
                let full = gen_prts(*stages, *velocity, *state_duration_s, rate_hz, cycles)?;
                let period = full.period_s();
                let mut samples = full.into_samples();
                samples.truncate(n);
                SignalSeries::new(samples, rate_hz, period)
            }
            ProfileKind::TiltImpulse { peak, width_s }
            | ProfileKind::TranslationImpulse { peak, width_s } => {
                gen_impulse(self.axis, *peak, *width_s, rate_hz, duration_s)
            }
            ProfileKind::Custom { samples, period_s } => {
                let mut out: Vec<f64> = samples.iter().copied().take(n).collect();
                out.resize(n, 0.0);
                SignalSeries::new(out, rate_hz, *period_s)
            }
        }
    }
}

fn check_amplitude(a: f64) -> Result<()> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::param(
            "amplitude",
            format!("must be finite and >= 0, got {a}"),
        ));
    }
    Ok(())
}

fn check_stages(stages: u32) -> Result<()> {
    if !(2..=8).contains(&stages) {
        return Err(Error::param(
            "stages",
            format!("must be in [2, 8], got {stages}"),
        ));
    }
    Ok(())
}

fn sample_count(duration_s: f64, rate_hz: f64) -> Result<usize> {
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(Error::param(
            "rate_hz",
            format!("must be > 0, got {rate_hz}"),
        ));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::param(
            "duration_s",
            format!("must be > 0, got {duration_s}"),
        ));
    }
    let n = (duration_s * rate_hz).round() as usize;
    if n == 0 {
        return Err(Error::param("duration_s", "shorter than one sample"));
    }
    Ok(n)
}

fn samples_per_state(state_duration_s: f64, rate_hz: f64) -> Result<usize> {
    let exact = state_duration_s * rate_hz;
    let sps = exact.round();
    if sps < 1.0 || (exact - sps).abs() > 1e-9 * exact.max(1.0) {
        return Err(Error::param(
            "state_duration_s",
            format!("must be a whole number of samples at {rate_hz} Hz"),
        ));
    }
    Ok(sps as usize)
}

/// `samples[k] = amplitude * sin(2π f k / rate)`.
pub fn gen_sine(
    amplitude: f64,
    freq_hz: f64,
    duration_s: f64,
    rate_hz: f64,
) -> Result<SignalSeries> {
    check_amplitude(amplitude)?;
    if !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::param(
            "freq_hz",
            format!("must be > 0, got {freq_hz}"),
        ));
    }
    let n = sample_count(duration_s, rate_hz)?;
    if rate_hz < MIN_SAMPLES_PER_CYCLE * freq_hz {
        return Err(Error::param(
            "rate_hz",
            format!("{rate_hz} Hz is below {MIN_SAMPLES_PER_CYCLE}x the stimulus frequency"),
        ));
    }
    let period = 1.0 / freq_hz;
    if duration_s < period * (1.0 - 1e-9) {
        return Err(Error::param("duration_s", "must cover at least one period"));
    }
    let w = 2.0 * PI * freq_hz;
    let samples = (0..n)
        .map(|k| amplitude * (w * k as f64 / rate_hz).sin())
        .collect();
    SignalSeries::new(samples, rate_hz, Some(period))
}

/// Base-3 maximal-length shift register.
///
/// Produces the ternary digits `s[k]` of the recurrence
/// `s[k+n] = -(c_0 s[k] + ... + c_{n-1} s[k+n-1]) mod 3`, starting from the
/// all-ones state. The period is `3^n - 1`.
#[derive(Debug, Clone)]
pub struct TernaryLfsr {
    taps: &'static [u8],
    state: Vec<u8>,
}

impl TernaryLfsr {
    pub fn new(stages: u32) -> Result<Self> {
        check_stages(stages)?;
        Ok(Self {
            taps: PRTS_TAPS[(stages - 2) as usize],
            state: vec![1; stages as usize],
        })
    }

    /// Current register contents, oldest digit first.
    pub fn state(&self) -> &[u8] {
        &self.state
    }

    /// Emits the oldest digit and shifts in the feedback digit.
    pub fn next_digit(&mut self) -> u8 {
        let fb: u32 = self
            .taps
            .iter()
            .zip(&self.state)
            .map(|(&c, &s)| u32::from(c) * u32::from(s))
            .sum();
        let next = ((3 - fb % 3) % 3) as u8;
        let out = self.state.remove(0);
        self.state.push(next);
        out
    }
}

/// Number of states in one PRTS period.
pub fn prts_length(stages: u32) -> usize {
    3usize.pow(stages) - 1
}

/// One period of the ternary sequence mapped to `{-1, 0, +1}`
/// (digit 1 → +1, digit 2 → -1).
pub fn prts_sequence(stages: u32) -> Result<Vec<i8>> {
    let mut reg = TernaryLfsr::new(stages)?;
    Ok((0..prts_length(stages))
        .map(|_| match reg.next_digit() {
            0 => 0,
            1 => 1,
            _ => -1,
        })
        .collect())
}

/// Ternary velocity signal `{-v, 0, +v}`, each state held `state_duration_s`.
pub fn prts_velocity(
    stages: u32,
    velocity: f64,
    state_duration_s: f64,
    rate_hz: f64,
    cycles: usize,
) -> Result<SignalSeries> {
    let (levels, sps) = prts_levels(stages, velocity, state_duration_s, rate_hz, cycles)?;
    let period = (prts_length(stages) * sps) as f64 / rate_hz;
    let samples = levels.iter().map(|&l| f64::from(l) * velocity).collect();
    SignalSeries::new(samples, rate_hz, Some(period))
}

fn prts_levels(
    stages: u32,
    velocity: f64,
    state_duration_s: f64,
    rate_hz: f64,
    cycles: usize,
) -> Result<(Vec<i8>, usize)> {
    if !(velocity.is_finite() && velocity > 0.0) {
        return Err(Error::param(
            "velocity",
            format!("must be > 0, got {velocity}"),
        ));
    }
    if cycles == 0 {
        return Err(Error::param("cycles", "must be >= 1"));
    }
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(Error::param(
            "rate_hz",
            format!("must be > 0, got {rate_hz}"),
        ));
    }
    let seq = prts_sequence(stages)?;
    let sps = samples_per_state(state_duration_s, rate_hz)?;
    let one: Vec<i8> = seq
        .iter()
        .flat_map(|&s| std::iter::repeat_n(s, sps))
        .collect();
    let levels = one
        .iter()
        .copied()
        .cycle()
        .take(one.len() * cycles)
        .collect();
    Ok((levels, sps))
}

/// PRTS position profile: the running integral of [`prts_velocity`],
/// starting at 0. The integral is accumulated in integer state counts so
/// every cycle repeats exactly.
pub fn gen_prts(
    stages: u32,
    velocity: f64,
    state_duration_s: f64,
    rate_hz: f64,
    cycles: usize,
) -> Result<SignalSeries> {
    let (levels, sps) = prts_levels(stages, velocity, state_duration_s, rate_hz, cycles)?;
    let step = velocity / rate_hz;
    let mut acc: i64 = 0;
    let samples = levels
        .iter()
        .map(|&l| {
            let x = acc as f64 * step;
            acc += i64::from(l);
            x
        })
        .collect();
    let period = (prts_length(stages) * sps) as f64 / rate_hz;
    SignalSeries::new(samples, rate_hz, Some(period))
}

/// Raised-cosine pulse of base width `width_s`, centred in the record.
///
/// The record has `round(duration_s * rate_hz)` samples, the peak sits on
/// sample `n / 2` and the pulse is exactly zero outside its base.
pub fn gen_impulse(
    _axis: Axis,
    peak: f64,
    width_s: f64,
    rate_hz: f64,
    duration_s: f64,
) -> Result<SignalSeries> {
    check_amplitude(peak)?;
    let n = sample_count(duration_s, rate_hz)?;
    if !(width_s.is_finite() && width_s > 0.0) {
        return Err(Error::param(
            "width_s",
            format!("must be > 0, got {width_s}"),
        ));
    }
    if width_s >= duration_s {
        return Err(Error::param("width_s", "must be shorter than the record"));
    }
    let w = width_s * rate_hz;
    if w < 2.0 {
        return Err(Error::param(
            "width_s",
            "pulse must span at least two samples",
        ));
    }
    let centre = (n / 2) as f64;
    let samples = (0..n)
        .map(|k| {
            let d = k as f64 - centre;
            if d.abs() * 2.0 < w {
                peak * 0.5 * (1.0 + (2.0 * PI * d / w).cos())
            } else {
                0.0
            }
        })
        .collect();
    SignalSeries::new(samples, rate_hz, None)
}
