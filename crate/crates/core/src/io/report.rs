//! Score reports, comparisons and reference sets (JSON).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::trial_file::trial_to_string;
use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    compare_to_reference, estimate_frf, gain, phase, power, stimulus_harmonics, trim_steady_state,
    wrap_angle, FrfResult, LikenessWeights,
};
use crate::testbench::{Channel, Outcome, Scenario, TrialRecord};

pub const REPORT_FORMAT: &str = "posturebench-report v1";
pub const COMPARISON_FORMAT: &str = "posturebench-comparison v1";
pub const REFERENCE_FORMAT: &str = "posturebench-reference v1";

/// Harmonics weaker than this fraction of the strongest are not reported.
const FRF_MIN_RELATIVE: f64 = 0.05;
const FRF_MAX_HZ: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum FrfRequest {
    #[default]
    None,
    /// All sufficiently excited stimulus harmonics.
    Auto,
    Frequencies(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalyzeOptions {
    /// Periods to discard; defaults to the spec echo, else 2.
    pub settle_periods: Option<usize>,
    /// Stimulus period for records that carry none.
    pub period_s: Option<f64>,
    /// Defaults to the channel the scenario drives.
    pub input: Option<Channel>,
    /// Defaults to CoM sway.
    pub response: Option<Channel>,
    pub frf: FrfRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimInfo {
    pub input: String,
    pub response: String,
    pub settle_periods: usize,
    pub periods_scored: usize,
    pub samples_per_period: usize,
    pub period_s: f64,
    pub rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    /// SHA-256 of the record's canonical trial-file text.
    pub trial_sha256: String,
    pub model: Option<String>,
    pub controller: Option<ControllerConfig>,
}

/// Scalar scores of one trial. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub format: String,
    pub outcome: Outcome,
    pub gain: f64,
    pub phase_rad: f64,
    /// Mean squared sway, rad².
    pub power_rad2: f64,
    /// Unit label used when power is tabulated for display.
    pub power_display_unit: String,
    pub mean_response: f64,
    pub normalized_torque_rms: Option<f64>,
    pub trim: TrimInfo,
    pub frf: Option<FrfResult>,
    pub provenance: Provenance,
}

impl ScoreReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.format != REPORT_FORMAT {
            return Err(Error::Format(format!(
                "unsupported report format `{}`",
                r.format
            )));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&crate::error::read_text(path)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn default_input(record: &TrialRecord) -> Channel {
    match record.meta.spec.as_ref().map(|s| s.scenario) {
        Some(Scenario::Translation) => Channel::Translation,
        Some(Scenario::ContactPull) => Channel::ContactTorque,
        _ => Channel::Fs,
    }
}

/// Scores a record: trims the transient, then computes gain, phase, power,
/// and optionally the FRF. Pure in the record contents.
pub fn analyze(record: &TrialRecord, opts: &AnalyzeOptions) -> Result<ScoreReport> {
    let input = opts.input.unwrap_or_else(|| default_input(record));
    let response = opts.response.unwrap_or(Channel::Com);
    let settle = opts
        .settle_periods
        .or_else(|| record.meta.spec.as_ref().map(|s| s.settle_periods))
        .unwrap_or(2);
    let period = opts.period_s.or(record.meta.period_s).ok_or_else(|| {
        Error::InsufficientData("record has no stimulus period; pass one explicitly".into())
    })?;

    let u = record.series(input)?.with_period(Some(period))?;
    let a = record.series(response)?.with_period(Some(period))?;
    let u = trim_steady_state(&u, settle)?;
    let a = trim_steady_state(&a, settle)?;
    let per = u.samples_per_period().unwrap_or(0);

    let model = record
        .meta
        .model
        .as_ref()
        .or(record.meta.spec.as_ref().map(|s| &s.model));
    let torque_rms = match (model, record.has(Channel::AnkleTorque)) {
        (Some(m), true) => {
            let t = record
                .normalized_ankle_torque(m)?
                .with_period(Some(period))?;
            Some(trim_steady_state(&t, settle)?.rms())
        }
        _ => None,
    };

    let frf = match &opts.frf {
        FrfRequest::None => None,
        FrfRequest::Auto => {
            let f = stimulus_harmonics(&u, FRF_MIN_RELATIVE, FRF_MAX_HZ)?;
            Some(estimate_frf(&u, &a, &f)?)
        }
        FrfRequest::Frequencies(f) => Some(estimate_frf(&u, &a, f)?),
    };

    Ok(ScoreReport {
        format: REPORT_FORMAT.into(),
        outcome: record.meta.outcome,
        gain: gain(&u, &a)?,
        phase_rad: phase(&u, &a)?,
        power_rad2: power(&a)?,
        power_display_unit: "rad^2/s".into(),
        mean_response: a.samples().iter().sum::<f64>() / a.len() as f64,
        normalized_torque_rms: torque_rms,
        trim: TrimInfo {
            input: input.column().into(),
            response: response.column().into(),
            settle_periods: settle,
            periods_scored: a.len() / per.max(1),
            samples_per_period: per,
            period_s: period,
            rate_hz: record.meta.rate_hz,
        },
        frf,
        provenance: Provenance {
            tool: concat!("posturebench ", env!("CARGO_PKG_VERSION")).into(),
            trial_sha256: sha256_hex(trial_to_string(record)?.as_bytes()),
            model: model.map(|m| m.name.clone()),
            controller: record.meta.spec.as_ref().map(|s| s.controller.clone()),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub gain: f64,
    /// Wrapped into (−π, π].
    pub phase_rad: f64,
    pub power_rad2: f64,
    pub normalized_torque_rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub format: String,
    pub subject: String,
    pub reference: String,
    /// Weighted RMS of log-gain and phase differences over frequency.
    pub likeness_distance: f64,
    pub frequencies_hz: Vec<f64>,
    /// `subject − reference`; absent against an FRF-only reference.
    pub deltas: Option<Deltas>,
}

/// The report's FRF, or its scalar gain/phase as a one-point FRF at the
/// stimulus fundamental.
fn response_frf(r: &ScoreReport) -> FrfResult {
    r.frf.clone().unwrap_or_else(|| FrfResult {
        frequencies_hz: vec![1.0 / r.trim.period_s],
        gain: vec![r.gain],
        phase: vec![r.phase_rad],
        coherence: vec![1.0],
    })
}

pub fn compare_reports(
    subject: &ScoreReport,
    reference: &ScoreReport,
    labels: (&str, &str),
    weights: LikenessWeights,
) -> Result<Comparison> {
    let (fa, fb) = (response_frf(subject), response_frf(reference));
    let distance = compare_to_reference(&fa, &fb, weights)?;
    let torque = match (
        subject.normalized_torque_rms,
        reference.normalized_torque_rms,
    ) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    Ok(Comparison {
        format: COMPARISON_FORMAT.into(),
        subject: labels.0.into(),
        reference: labels.1.into(),
        likeness_distance: distance,
        frequencies_hz: fa.frequencies_hz,
        deltas: Some(Deltas {
            gain: subject.gain - reference.gain,
            phase_rad: wrap_angle(subject.phase_rad - reference.phase_rad),
            power_rad2: subject.power_rad2 - reference.power_rad2,
            normalized_torque_rms: torque,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub name: String,
    pub subject: String,
    pub condition: String,
    pub provenance: String,
    /// True for model-generated entries that are not human recordings.
    pub synthetic: bool,
    pub frf: FrfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub format: String,
    pub name: String,
    pub notes: String,
    pub entries: Vec<ReferenceEntry>,
}

impl ReferenceSet {
    pub fn validate(&self) -> Result<()> {
        if self.format != REFERENCE_FORMAT {
            return Err(Error::Format(format!(
                "unsupported reference format `{}`",
                self.format
            )));
        }
        if self.entries.is_empty() {
            return Err(Error::InsufficientData(
                "reference set has no entries".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.name.as_str()) {
                return Err(Error::Format(format!(
                    "duplicate reference entry `{}`",
                    e.name
                )));
            }
            e.frf
                .validate()
                .map_err(|err| Error::Format(format!("entry `{}`: {err}", e.name)))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&crate::error::read_text(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Synthetic, non-human placeholder evaluated on `frequencies_hz`: a
    /// first-order low-pass (0.5 Hz corner, DC gain 0.6) with 150 ms delay.
    pub fn placeholder(frequencies_hz: &[f64]) -> Result<Self> {
        if frequencies_hz.is_empty() || frequencies_hz.iter().any(|f| !(f.is_finite() && *f > 0.0))
        {
            return Err(Error::param("frequencies_hz", "must be non-empty and > 0"));
        }
        let (dc, corner, delay) = (0.6, 0.5, 0.15);
        let gain = frequencies_hz
            .iter()
            .map(|f| dc / (1.0 + (f / corner).powi(2)).sqrt())
            .collect();
        let phase = frequencies_hz
            .iter()
            .map(|f| wrap_angle(-(f / corner).atan() - 2.0 * std::f64::consts::PI * f * delay))
            .collect();
        Ok(Self {
            format: REFERENCE_FORMAT.into(),
            name: "synthetic-placeholder".into(),
            notes: "SYNTHETIC PLACEHOLDER - NOT HUMAN DATA. Analytic low-pass with delay, for exercising the comparison pipeline only.".into(),
            entries: vec![ReferenceEntry {
                name: "placeholder-tilt".into(),
                subject: "synthetic (non-human)".into(),
                condition: "support tilt, eyes closed (nominal)".into(),
                provenance: "generated analytically; no recording".into(),
                synthetic: true,
                frf: FrfResult {
                    frequencies_hz: frequencies_hz.to_vec(),
                    gain,
                    phase,
                    coherence: vec![1.0; frequencies_hz.len()],
                },
            }],
        })
    }
}

/// Likeness of a report's FRF to every entry of a reference set.
pub fn compare_to_set(
    subject: &ScoreReport,
    label: &str,
    set: &ReferenceSet,
    weights: LikenessWeights,
) -> Result<Vec<Comparison>> {
    set.validate()?;
    let frf = response_frf(subject);
    set.entries
        .iter()
        .map(|e| {
            Ok(Comparison {
                format: COMPARISON_FORMAT.into(),
                subject: label.into(),
                reference: format!("{}/{}", set.name, e.name),
                likeness_distance: compare_to_reference(&frf, &e.frf, weights)?,
                frequencies_hz: frf.frequencies_hz.clone(),
                deltas: None,
            })
        })
        .collect()
}
