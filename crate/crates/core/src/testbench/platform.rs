use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::Axis;
use crate::signal::SignalSeries;

/// Actuation envelope of the motion platform.
///
/// The defaults are conservative placeholders, not measured figures for any
/// particular device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlatformModel {
    /// ± rad
    pub tilt_range: f64,
    /// rad/s
    pub tilt_rate_limit: f64,
    /// ± m
    pub translation_range: f64,
    /// m/s²
    pub accel_limit: f64,
    /// First-order tracking time constant; 0 tracks the command exactly.
    pub time_constant_s: f64,
}

impl Default for PlatformModel {
    fn default() -> Self {
        Self {
            tilt_range: 0.175,
            tilt_rate_limit: 0.52,
            translation_range: 0.25,
            accel_limit: 5.0,
            time_constant_s: 0.02,
        }
    }
}

impl PlatformModel {
    /// Exact tracking with limits far outside any balancing motion.
    pub fn ideal() -> Self {
        Self {
            tilt_range: 10.0,
            tilt_rate_limit: 1e3,
            translation_range: 1e3,
            accel_limit: 1e4,
            time_constant_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("platform.tilt_range", self.tilt_range),
            ("platform.tilt_rate_limit", self.tilt_rate_limit),
            ("platform.translation_range", self.translation_range),
            ("platform.accel_limit", self.accel_limit),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.time_constant_s.is_finite() && self.time_constant_s >= 0.0) {
            return Err(Error::param("platform.time_constant_s", "must be >= 0"));
        }
        Ok(())
    }

    pub fn tracker(&self, axis: Axis) -> AxisTracker {
        match axis {
            Axis::SupportTilt => AxisTracker {
                time_constant_s: self.time_constant_s,
                rate_limit: Some(self.tilt_rate_limit),
                accel_limit: None,
                range: self.tilt_range,
                position: 0.0,
                velocity: 0.0,
            },
            Axis::SupportTranslation => AxisTracker {
                time_constant_s: self.time_constant_s,
                rate_limit: None,
                accel_limit: Some(self.accel_limit),
                range: self.translation_range,
                position: 0.0,
                velocity: 0.0,
            },
        }
    }
}

/// One platform axis starting at rest in its home position.
#[derive(Debug, Clone)]
pub struct AxisTracker {
    time_constant_s: f64,
    rate_limit: Option<f64>,
    accel_limit: Option<f64>,
    range: f64,
    position: f64,
    velocity: f64,
}

impl AxisTracker {
    /// Advances by `dt` toward `command`: first-order tracking, then the
    /// rate (or acceleration) clamp, then the range clamp.
    pub fn step(&mut self, command: f64, dt: f64) -> f64 {
        let target = if self.time_constant_s > 0.0 {
            self.position + (1.0 - (-dt / self.time_constant_s).exp()) * (command - self.position)
        } else {
            command
        };
        let wanted = (target - self.position) / dt;
        let mut v = wanted;
        if let Some(r) = self.rate_limit {
            v = v.clamp(-r, r);
        }
        if let Some(a) = self.accel_limit {
            v = v.clamp(self.velocity - a * dt, self.velocity + a * dt);
        }
        let unclamped = if v == wanted {
            target
        } else {
            self.position + v * dt
        };
        let next = unclamped.clamp(-self.range, self.range);
        self.velocity = (next - self.position) / dt;
        self.position = next;
        next
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    /// Discrete velocity over the last step.
    pub fn velocity(&self) -> f64 {
        self.velocity
    }
}

/// Runs a whole command series through one platform axis.
pub fn apply_platform_limits(
    command: &SignalSeries,
    model: &PlatformModel,
    axis: Axis,
) -> Result<SignalSeries> {
    model.validate()?;
    let dt = command.dt();
    let mut tracker = model.tracker(axis);
    let out = command
        .samples()
        .iter()
        .map(|&c| tracker.step(c, dt))
        .collect();
    SignalSeries::new(out, command.rate_hz(), command.period_s())
}
