//! Balance controllers and the body-sway-referenced platform law.
//!
//! Torque sign follows the plant: a positive ankle torque accelerates the
//! body forward, so restoring torques for a forward lean are negative.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::AnthropometricModel;

/// Default estimator dead-zone on the support-tilt rate (0.1 deg/s).
pub const DEFAULT_TILT_DEADZONE: f64 = 0.0017;
pub const DEFAULT_CUTOFF_HZ: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// No actuation at all.
    Off,
    Pd,
    Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    /// N·m/rad
    pub kp: f64,
    /// N·m·s/rad
    pub kd: f64,
    /// The controller's belief of m·g·h.
    pub nominal_mgh: f64,
    /// The controller's belief of the body inertia about the ankle.
    pub nominal_inertia: f64,
    /// Dead-zone on the support-tilt rate estimate, rad/s.
    pub tilt_deadzone: f64,
    pub tilt_cutoff_hz: f64,
    /// Fraction of the contact-torque estimate fed back, 0 disables.
    pub contact_gain: f64,
    /// Dead-zone on the contact-torque estimate, N·m.
    pub contact_deadzone: f64,
    pub contact_cutoff_hz: f64,
    /// Controller update rate; `None` runs at the simulation rate.
    #[serde(default)]
    pub loop_rate_hz: Option<f64>,
    /// Symmetric torque limit, N·m.
    pub saturation: f64,
    pub hip_kp: f64,
    pub hip_kd: f64,
}

impl ControllerConfig {
    /// Defaults scaled to `model`: Kp = 1.5·mgh, Kd = 0.3·mgh·s, 1 Hz
    /// estimator cut-offs, 0.1 deg/s tilt dead-zone.
    pub fn for_model(kind: ControllerKind, model: &AnthropometricModel) -> Self {
        let mgh = model.mgh();
        let trunk_mgh = match model.segments.as_slice() {
            [_, trunk] => trunk.mass_kg * trunk.com_offset_m * model.gravity,
            _ => 0.0,
        };
        Self {
            kind,
            kp: 1.5 * mgh,
            kd: 0.3 * mgh,
            nominal_mgh: mgh,
            nominal_inertia: model.inertia_about_ankle(),
            tilt_deadzone: DEFAULT_TILT_DEADZONE,
            tilt_cutoff_hz: DEFAULT_CUTOFF_HZ,
            contact_gain: 1.0,
            contact_deadzone: 0.02 * mgh,
            contact_cutoff_hz: DEFAULT_CUTOFF_HZ,
            loop_rate_hz: None,
            saturation: 0.6 * mgh,
            hip_kp: 2.0 * trunk_mgh,
            hip_kd: 0.2 * trunk_mgh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("kp", self.kp),
            ("kd", self.kd),
            ("nominal_mgh", self.nominal_mgh),
            ("tilt_deadzone", self.tilt_deadzone),
            ("contact_gain", self.contact_gain),
            ("contact_deadzone", self.contact_deadzone),
            ("hip_kp", self.hip_kp),
            ("hip_kd", self.hip_kd),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        let positive = [
            ("nominal_inertia", self.nominal_inertia),
            ("tilt_cutoff_hz", self.tilt_cutoff_hz),
            ("contact_cutoff_hz", self.contact_cutoff_hz),
            ("saturation", self.saturation),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if let Some(r) = self.loop_rate_hz {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::param("loop_rate_hz", "must be > 0"));
            }
        }
        if self.kind == ControllerKind::Pd && self.kp <= self.nominal_mgh {
            return Err(Error::param(
                "kp",
                format!(
                    "PD stiffness {} must exceed mgh {} to hold the body upright",
                    self.kp, self.nominal_mgh
                ),
            ));
        }
        Ok(())
    }
}

/// What the controller can sense.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SensorReadings {
    /// Body-in-space sway and rate (vestibular / IMU).
    pub body_sway: f64,
    pub body_rate: f64,
    /// Ankle joint angle and rate, body relative to foot (proprioception / encoder).
    pub ankle_angle: f64,
    pub ankle_rate: f64,
    pub hip_angle: f64,
    pub hip_rate: f64,
}

fn clamp_sym(x: f64, limit: f64) -> f64 {
    x.clamp(-limit, limit)
}

/// `sign(x)·max(|x| − width, 0)`
pub fn dead_zone(x: f64, width: f64) -> f64 {
    if x > width {
        x - width
    } else if x < -width {
        x + width
    } else {
        0.0
    }
}

fn low_pass_coefficient(cutoff_hz: f64, dt: f64) -> f64 {
    1.0 - (-2.0 * PI * cutoff_hz * dt).exp()
}

/// `τ = clamp(−Kp·(BS − setpoint) − Kd·BS_rate, ±saturation)`.
pub fn pd_control(readings: &SensorReadings, setpoint: f64, cfg: &ControllerConfig) -> f64 {
    let tau = -cfg.kp * (readings.body_sway - setpoint) - cfg.kd * readings.body_rate;
    clamp_sym(tau, cfg.saturation)
}

fn hip_control(readings: &SensorReadings, cfg: &ControllerConfig) -> f64 {
    clamp_sym(
        -cfg.hip_kp * readings.hip_angle - cfg.hip_kd * readings.hip_rate,
        cfg.saturation,
    )
}

/// Internal state of the disturbance estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecState {
    pub tilt_rate_lp: f64,
    /// Integrated support-tilt estimate.
    pub tilt: f64,
    pub contact_lp: f64,
    pub prev_body_rate: Option<f64>,
    pub prev_torque: f64,
}

/// Individual torque contributions of one DEC update, before saturation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecOutput {
    pub torque: f64,
    pub servo: f64,
    pub gravity: f64,
    pub tilt: f64,
    pub contact: f64,
    /// Dead-zoned tilt-rate estimate.
    pub tilt_rate_estimate: f64,
    /// Dead-zoned contact-torque estimate.
    pub contact_estimate: f64,
}

/// Single-joint disturbance estimation and compensation.
///
/// The servo acts on the proprioceptive ankle angle. The support tilt is
/// reconstructed from the vestibular/proprioceptive rate difference
/// (low-pass, dead-zone, integrate) and added back through the servo gains,
/// so with a perfect estimate the loop regulates body-in-space sway. Gravity
/// is cancelled with the nominal mgh, and a contact torque is estimated from
/// the residual of the nominal equation of motion.
pub fn dec_control(
    readings: &SensorReadings,
    cfg: &ControllerConfig,
    state: &DecState,
    dt: f64,
) -> (DecOutput, DecState) {
    let mut next = *state;

    let tilt_rate_raw = readings.body_rate - readings.ankle_rate;
    next.tilt_rate_lp +=
        low_pass_coefficient(cfg.tilt_cutoff_hz, dt) * (tilt_rate_raw - next.tilt_rate_lp);
    let tilt_rate = dead_zone(next.tilt_rate_lp, cfg.tilt_deadzone);
    next.tilt += tilt_rate * dt;

    let gravity_torque = cfg.nominal_mgh * readings.body_sway.sin();
    let body_acc = state
        .prev_body_rate
        .map_or(0.0, |prev| (readings.body_rate - prev) / dt);
    let residual = cfg.nominal_inertia * body_acc - gravity_torque - state.prev_torque;
    if state.prev_body_rate.is_some() {
        next.contact_lp +=
            low_pass_coefficient(cfg.contact_cutoff_hz, dt) * (residual - next.contact_lp);
    }
    let contact_estimate = dead_zone(next.contact_lp, cfg.contact_deadzone);

    let servo = -cfg.kp * readings.ankle_angle - cfg.kd * readings.ankle_rate;
    let tilt = -cfg.kp * next.tilt - cfg.kd * tilt_rate;
    let gravity = -gravity_torque;
    let contact = -cfg.contact_gain * contact_estimate;
    let torque = clamp_sym(servo + tilt + gravity + contact, cfg.saturation);

    next.prev_body_rate = Some(readings.body_rate);
    next.prev_torque = torque;
    (
        DecOutput {
            torque,
            servo,
            gravity,
            tilt,
            contact,
            tilt_rate_estimate: tilt_rate,
            contact_estimate,
        },
        next,
    )
}

/// Platform tilt command that keeps the ankle angle fixed: tilt follows CoM sway.
pub fn bsrp_command(com_sway: f64) -> f64 {
    com_sway
}

/// A controller instance with private estimator state, optionally running at
/// a decimated rate with zero-order hold between updates.
#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ControllerConfig,
    dec: DecState,
    decimation: usize,
    calls: usize,
    held: [f64; 2],
}

impl Controller {
    pub fn new(cfg: ControllerConfig, sim_rate_hz: f64) -> Result<Self> {
        cfg.validate()?;
        let decimation = match cfg.loop_rate_hz {
            None => 1,
            Some(r) => {
                let d = sim_rate_hz / r;
                if d < 1.0 - 1e-9 || (d - d.round()).abs() > 1e-9 {
                    return Err(Error::param(
                        "loop_rate_hz",
                        format!("{r} Hz must divide the simulation rate {sim_rate_hz} Hz"),
                    ));
                }
                d.round() as usize
            }
        };
        Ok(Self {
            cfg,
            dec: DecState::default(),
            decimation,
            calls: 0,
            held: [0.0; 2],
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// Returns `[ankle, hip]` torques for one simulation step of `dt`.
    pub fn update(&mut self, readings: &SensorReadings, dt: f64) -> [f64; 2] {
        if self.calls.is_multiple_of(self.decimation) {
            let dt_ctrl = dt * self.decimation as f64;
            self.held = match self.cfg.kind {
                ControllerKind::Off => [0.0, 0.0],
                ControllerKind::Pd => [
                    pd_control(readings, 0.0, &self.cfg),
                    hip_control(readings, &self.cfg),
                ],
                ControllerKind::Dec => {
                    let (out, next) = dec_control(readings, &self.cfg, &self.dec, dt_ctrl);
                    self.dec = next;
                    [out.torque, hip_control(readings, &self.cfg)]
                }
            };
        }
        self.calls += 1;
        self.held
    }
}
