use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::platform::PlatformModel;
use crate::controller::{bsrp_command, Controller, ControllerConfig, SensorReadings};
use crate::error::{Error, Result};
use crate::metrics::normalize_torque;
use crate::perturbation::{Axis, PerturbationProfile};
use crate::plant::{
    com_sway, integrate_step, AddedMass, AnthropometricModel, Configuration, DisturbanceInputs,
    Plant, PlantState,
};
use crate::signal::SignalSeries;

pub const MIN_RATE_HZ: f64 = 50.0;

/// Which disturbance the profile drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Profile is the support tilt, rad.
    Tilt,
    /// Profile is the horizontal support position, m.
    Translation,
    /// Profile is an external torque about the ankle, N·m.
    ContactPull,
    /// Platform tilt follows CoM sway; the profile is ignored.
    Bsrp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub scenario: Scenario,
    pub profile: PerturbationProfile,
    pub model: AnthropometricModel,
    #[serde(default)]
    pub added_mass: Option<AddedMass>,
    #[serde(default)]
    pub configuration: Configuration,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub platform: PlatformModel,
    pub duration_s: f64,
    pub rate_hz: f64,
    /// Leading stimulus periods discarded before scoring.
    #[serde(default = "default_settle")]
    pub settle_periods: usize,
    /// Initial rigid-body lean, rad.
    #[serde(default)]
    pub initial_sway: f64,
    /// |CoM sway| beyond which the trial ends as fallen, rad.
    #[serde(default = "default_fall_threshold")]
    pub fall_threshold: f64,
}

fn default_settle() -> usize {
    2
}

fn default_fall_threshold() -> f64 {
    0.5
}

impl TrialSpec {
    /// Stimulus period at the trial rate, for periodic profiles.
    pub fn period_s(&self) -> Option<f64> {
        match self.scenario {
            Scenario::Bsrp => None,
            _ => self.profile.period_s(self.rate_hz),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_hz.is_finite() && self.rate_hz >= MIN_RATE_HZ) {
            return Err(Error::param(
                "rate_hz",
                format!("must be >= {MIN_RATE_HZ} Hz, got {}", self.rate_hz),
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::param("duration_s", "must be > 0"));
        }
        if !(self.fall_threshold.is_finite() && self.fall_threshold > 0.0) {
            return Err(Error::param("fall_threshold", "must be > 0"));
        }
        if !self.initial_sway.is_finite() || self.initial_sway.abs() >= self.fall_threshold {
            return Err(Error::param(
                "initial_sway",
                "must be finite and inside the fall threshold",
            ));
        }
        self.model.validate()?;
        if let Some(a) = &self.added_mass {
            a.validate()?;
        }
        self.controller.validate()?;
        self.platform.validate()?;
        if self.scenario != Scenario::Bsrp {
            self.profile.validate()?;
            let wanted = match self.scenario {
                Scenario::Tilt => Some(Axis::SupportTilt),
                Scenario::Translation => Some(Axis::SupportTranslation),
                _ => None,
            };
            if let Some(axis) = wanted {
                if self.profile.axis != axis {
                    return Err(Error::param("profile.axis", "does not match the scenario"));
                }
            }
            if let Some(period) = self.period_s() {
                let needed = (self.settle_periods + 3) as f64 * period;
                if self.duration_s < needed * (1.0 - 1e-9) {
                    return Err(Error::param(
                        "duration_s",
                        format!(
                            "{} s is shorter than (settle_periods + 3) periods = {needed} s",
                            self.duration_s
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Completed,
    Fallen,
}

/// Recorded channels, all sampled on the same uniform time base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    PlatformCmd,
    Fs,
    Ss,
    Ls,
    Ts,
    Com,
    AnkleTorque,
    HipTorque,
    Translation,
    ContactTorque,
}

impl Channel {
    pub const ALL: [Channel; 10] = [
        Channel::PlatformCmd,
        Channel::Fs,
        Channel::Ss,
        Channel::Ls,
        Channel::Ts,
        Channel::Com,
        Channel::AnkleTorque,
        Channel::HipTorque,
        Channel::Translation,
        Channel::ContactTorque,
    ];

    /// Column name in the trial file.
    pub fn column(self) -> &'static str {
        match self {
            Channel::PlatformCmd => "platform_cmd_rad",
            Channel::Fs => "fs_rad",
            Channel::Ss => "ss_rad",
            Channel::Ls => "ls_rad",
            Channel::Ts => "ts_rad",
            Channel::Com => "com_rad",
            Channel::AnkleTorque => "ankle_torque_nm",
            Channel::HipTorque => "hip_torque_nm",
            Channel::Translation => "translation_m",
            Channel::ContactTorque => "contact_torque_nm",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.column() == name)
    }

    /// Angle channels, for which the round-trip tolerance is stated in rad.
    pub fn is_angle(self) -> bool {
        matches!(
            self,
            Channel::PlatformCmd
                | Channel::Fs
                | Channel::Ss
                | Channel::Ls
                | Channel::Ts
                | Channel::Com
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub spec: Option<TrialSpec>,
    pub model: Option<AnthropometricModel>,
    pub outcome: Outcome,
    pub fall_time_s: Option<f64>,
    pub rate_hz: f64,
    pub period_s: Option<f64>,
}

/// One recorded run. `Fs` is always present; legacy files may lack others.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub meta: TrialMeta,
    pub start_time_s: f64,
    pub channels: BTreeMap<Channel, Vec<f64>>,
}

impl TrialRecord {
    pub fn len(&self) -> usize {
        self.channels.get(&Channel::Fs).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start_time_s + k as f64 / self.meta.rate_hz
    }

    pub fn has(&self, c: Channel) -> bool {
        self.channels.contains_key(&c)
    }

    pub fn channel(&self, c: Channel) -> Result<&[f64]> {
        self.channels
            .get(&c)
            .map(Vec::as_slice)
            .ok_or(Error::MissingChannel(c.column()))
    }

    /// A channel as a series carrying the record's rate and stimulus period.
    pub fn series(&self, c: Channel) -> Result<SignalSeries> {
        SignalSeries::new(
            self.channel(c)?.to_vec(),
            self.meta.rate_hz,
            self.meta.period_s,
        )
    }

    /// Ankle torque divided by the model's mgh.
    pub fn normalized_ankle_torque(&self, model: &AnthropometricModel) -> Result<SignalSeries> {
        normalize_torque(&self.series(Channel::AnkleTorque)?, model)
    }

    /// Segment-in-space channels in model order, as used for CoM sway.
    pub fn segment_channels(&self, segments: usize) -> Result<Vec<&[f64]>> {
        match segments {
            1 => Ok(vec![self.channel(Channel::Ss)?]),
            2 => Ok(vec![self.channel(Channel::Ls)?, self.channel(Channel::Ts)?]),
            n => Err(Error::Mismatch(format!(
                "no segment channel layout for {n} segments"
            ))),
        }
    }
}

/// Runs one deterministic closed-loop trial.
///
/// Each step: the platform tracks its command under its limits, the
/// controller reads the sensors, every channel is recorded, and the plant is
/// integrated over one sample period with inputs held. A CoM sway beyond
/// the fall threshold or a non-finite state ends the record as fallen.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialRecord> {
    spec.validate()?;
    let rate = spec.rate_hz;
    let dt = 1.0 / rate;
    let n = (spec.duration_s * rate).round() as usize;
    let plant = Plant::new(&spec.model, spec.added_mass.as_ref(), spec.configuration)?;
    let mut controller = Controller::new(spec.controller.clone(), rate)?;

    let stimulus = match spec.scenario {
        Scenario::Bsrp => vec![0.0; n],
        _ => spec.profile.realize(spec.duration_s, rate)?.into_samples(),
    };

    // The translation trajectory does not depend on the body, so it is
    // computed up front and differentiated centrally.
    let translation: Vec<f64> = if spec.scenario == Scenario::Translation {
        let mut tr = spec.platform.tracker(Axis::SupportTranslation);
        stimulus.iter().map(|&c| tr.step(c, dt)).collect()
    } else {
        vec![0.0; n]
    };
    let position = |k: isize| -> f64 {
        if k < 0 {
            0.0
        } else {
            translation[(k as usize).min(n - 1)]
        }
    };

    let mut tilt = spec.platform.tracker(Axis::SupportTilt);
    let mut state = PlantState::leaning(spec.initial_sway);
    let two_link = !matches!(spec.configuration, Configuration::Sip);

    let mut rec: BTreeMap<Channel, Vec<f64>> = BTreeMap::new();
    let mut channels = vec![
        Channel::PlatformCmd,
        Channel::Fs,
        Channel::Ss,
        Channel::Ls,
        Channel::Ts,
        Channel::Com,
        Channel::AnkleTorque,
    ];
    if two_link {
        channels.push(Channel::HipTorque);
    }
    match spec.scenario {
        Scenario::Translation => channels.push(Channel::Translation),
        Scenario::ContactPull => channels.push(Channel::ContactTorque),
        _ => {}
    }
    for c in &channels {
        rec.insert(*c, Vec::with_capacity(n));
    }
    let mut push = |c: Channel, v: f64| {
        if let Some(col) = rec.get_mut(&c) {
            col.push(v);
        }
    };

    let segment_sways = |s: &PlantState| -> Vec<f64> {
        if spec.model.segments.len() == 2 {
            s.sway.to_vec()
        } else {
            vec![s.sway[0]; spec.model.segments.len()]
        }
    };

    let mut fall_at = None;
    for k in 0..n {
        let com = com_sway(&segment_sways(&state), &spec.model)?;
        if com.abs() > spec.fall_threshold {
            fall_at = Some(k);
            break;
        }
        let u = stimulus[k];
        let tilt_cmd = match spec.scenario {
            Scenario::Tilt => u,
            Scenario::Bsrp => bsrp_command(com),
            _ => 0.0,
        };
        let fs = tilt.step(tilt_cmd, dt);
        let fs_rate = tilt.velocity();
        state.fs = fs;

        let ki = k as isize;
        let accel = (position(ki + 1) - 2.0 * position(ki) + position(ki - 1)) * rate * rate;
        let contact = if spec.scenario == Scenario::ContactPull {
            u
        } else {
            0.0
        };

        let readings = SensorReadings {
            body_sway: state.sway[0],
            body_rate: state.rate[0],
            ankle_angle: state.ankle_angle(),
            ankle_rate: state.rate[0] - fs_rate,
            hip_angle: state.hip_angle(),
            hip_rate: state.rate[1] - state.rate[0],
        };
        let torques = controller.update(&readings, dt);

        push(Channel::PlatformCmd, tilt_cmd);
        push(Channel::Fs, fs);
        push(Channel::Ss, state.sway[0]);
        push(Channel::Ls, state.sway[0]);
        push(Channel::Ts, state.sway[1]);
        push(Channel::Com, com);
        push(Channel::AnkleTorque, torques[0]);
        push(Channel::HipTorque, torques[1]);
        push(Channel::Translation, translation[k]);
        push(Channel::ContactTorque, contact);

        let dist = DisturbanceInputs {
            support_tilt: fs,
            support_tilt_rate: fs_rate,
            support_accel: accel,
            contact_torque: contact,
        };
        match integrate_step(&plant, &state, torques, &dist, dt) {
            Ok(next) => state = next,
            Err(Error::NonFiniteState) => {
                fall_at = Some(k + 1);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let (outcome, fall_time_s) = match fall_at {
        Some(k) if k < n => (Outcome::Fallen, Some(k as f64 * dt)),
        _ => (Outcome::Completed, None),
    };
    Ok(TrialRecord {
        meta: TrialMeta {
            spec: Some(spec.clone()),
            model: Some(spec.model.clone()),
            outcome,
            fall_time_s,
            rate_hz: rate,
            period_s: spec.period_s(),
        },
        start_time_s: 0.0,
        channels: rec,
    })
}

/// Runs two trials that share stimulus, duration, rate and scenario, for A/B
/// comparison. The trials run concurrently.
pub fn run_pair(nominal: &TrialSpec, modified: &TrialSpec) -> Result<(TrialRecord, TrialRecord)> {
    if nominal.profile != modified.profile {
        return Err(Error::Mismatch(
            "paired trials must share the perturbation profile".into(),
        ));
    }
    if nominal.duration_s != modified.duration_s || nominal.rate_hz != modified.rate_hz {
        return Err(Error::Mismatch(
            "paired trials must share duration and rate".into(),
        ));
    }
    if nominal.scenario != modified.scenario {
        return Err(Error::Mismatch(
            "paired trials must share the scenario".into(),
        ));
    }
    let (a, b) = std::thread::scope(|s| {
        let a = s.spawn(|| run_trial(nominal));
        let b = run_trial(modified);
        (a.join().expect("trial thread panicked"), b)
    });
    Ok((a?, b?))
}
