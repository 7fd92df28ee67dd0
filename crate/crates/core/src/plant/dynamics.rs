use serde::{Deserialize, Serialize};

use super::model::{AddedMass, AnthropometricModel};
use crate::error::{Error, Result};

/// Largest integration step accepted by [`integrate_step`].
pub const MAX_STEP_S: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Configuration {
    /// Ankle joint only; the whole body is one rigid link.
    #[default]
    Sip,
    /// Ankle and hip joints.
    Dip,
    /// Two-link body with the hip constrained to zero angle and rate.
    DipHipLocked,
}

/// External inputs held constant across one integration step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceInputs {
    pub support_tilt: f64,
    pub support_tilt_rate: f64,
    /// Horizontal support acceleration, positive forward.
    pub support_accel: f64,
    /// External torque about the ankle, positive pulls the body forward.
    pub contact_torque: f64,
}

/// Body state: in-space segment angles and rates plus the foot-in-space angle.
///
/// In the SIP configuration both entries of `sway`/`rate` hold the same
/// value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    /// In-space angles of the leg and trunk links.
    pub sway: [f64; 2],
    pub rate: [f64; 2],
    /// Foot-in-space angle, equal to the platform tilt.
    pub fs: f64,
}

impl PlantState {
    pub fn upright() -> Self {
        Self::default()
    }

    /// Rigid-body lean of `angle` rad with the platform level.
    pub fn leaning(angle: f64) -> Self {
        Self {
            sway: [angle, angle],
            rate: [0.0, 0.0],
            fs: 0.0,
        }
    }

    pub fn ankle_angle(&self) -> f64 {
        self.sway[0] - self.fs
    }

    pub fn hip_angle(&self) -> f64 {
        self.sway[1] - self.sway[0]
    }

    pub fn is_finite(&self) -> bool {
        self.sway.iter().chain(&self.rate).all(|x| x.is_finite()) && self.fs.is_finite()
    }
}

/// Time derivative of the angular part of [`PlantState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Derivative {
    pub d_sway: [f64; 2],
    pub d_rate: [f64; 2],
}

/// Rigid-body parameters of the single inverted pendulum, with any added
/// mass merged in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SipParams {
    pub mass: f64,
    /// m'·h'
    pub mass_moment: f64,
    /// Inertia about the ankle.
    pub inertia: f64,
    pub gravity: f64,
    /// added mass · g · eccentricity
    pub eccentric_torque: f64,
}

impl SipParams {
    pub fn new(model: &AnthropometricModel, added: Option<&AddedMass>) -> Self {
        let mut p = Self {
            mass: model.total_mass(),
            mass_moment: model.mass_moment(),
            inertia: model.inertia_about_ankle(),
            gravity: model.gravity,
            eccentric_torque: 0.0,
        };
        if let Some(a) = added {
            p.mass += a.mass_kg;
            p.mass_moment += a.mass_kg * a.height_m;
            p.inertia +=
                a.mass_kg * (a.height_m * a.height_m + a.eccentricity_m * a.eccentricity_m);
            p.eccentric_torque = a.mass_kg * model.gravity * a.eccentricity_m;
        }
        p
    }

    pub fn com_height(&self) -> f64 {
        self.mass_moment / self.mass
    }

    pub fn mgh(&self) -> f64 {
        self.mass_moment * self.gravity
    }
}

/// Two-link parameters. Link 1 spans ankle to hip, link 2 sits on the hip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipParams {
    /// Ankle-to-hip length.
    pub l1: f64,
    /// First mass moment of link 1 about the ankle.
    pub s1: f64,
    /// Inertia of link 1 about the ankle.
    pub k1: f64,
    pub m2: f64,
    /// First mass moment of link 2 about the hip.
    pub s2: f64,
    /// Inertia of link 2 about the hip.
    pub k2: f64,
    pub gravity: f64,
    pub eccentric_torque: f64,
}

impl DipParams {
    /// Requires a two-segment model; an added mass must sit on the leg link.
    pub fn new(model: &AnthropometricModel, added: Option<&AddedMass>) -> Result<Self> {
        let [legs, trunk] = model.segments.as_slice() else {
            return Err(Error::param(
                "segments",
                format!(
                    "double pendulum needs 2 segments, model has {}",
                    model.segments.len()
                ),
            ));
        };
        let mut p = Self {
            l1: legs.length_m,
            s1: legs.mass_kg * legs.com_offset_m,
            k1: legs.inertia_kgm2 + legs.mass_kg * legs.com_offset_m * legs.com_offset_m,
            m2: trunk.mass_kg,
            s2: trunk.mass_kg * trunk.com_offset_m,
            k2: trunk.inertia_kgm2 + trunk.mass_kg * trunk.com_offset_m * trunk.com_offset_m,
            gravity: model.gravity,
            eccentric_torque: 0.0,
        };
        if let Some(a) = added {
            if a.height_m > legs.length_m {
                return Err(Error::param(
                    "added_mass.height_m",
                    "double pendulum supports added mass on the leg link only",
                ));
            }
            p.s1 += a.mass_kg * a.height_m;
            p.k1 += a.mass_kg * (a.height_m * a.height_m + a.eccentricity_m * a.eccentricity_m);
            p.eccentric_torque = a.mass_kg * model.gravity * a.eccentricity_m;
        }
        Ok(p)
    }

    fn mass_matrix(&self, th1: f64, th2: f64) -> [[f64; 2]; 2] {
        let m11 = self.k1 + self.m2 * self.l1 * self.l1;
        let m12 = self.l1 * self.s2 * (th1 - th2).cos();
        [[m11, m12], [m12, self.k2]]
    }
}

/// Single inverted pendulum:
/// `J·α̈ = m'g h' sin α − m'h' cos α · a + τ_ankle + τ_contact + τ_ecc cos α`.
pub fn sip_derivative(
    state: &PlantState,
    ankle_torque: f64,
    dist: &DisturbanceInputs,
    params: &SipParams,
) -> Derivative {
    let a = state.sway[0];
    let (s, c) = a.sin_cos();
    let torque = params.mass_moment * (params.gravity * s - c * dist.support_accel)
        + ankle_torque
        + dist.contact_torque
        + params.eccentric_torque * c;
    let acc = torque / params.inertia;
    Derivative {
        d_sway: [state.rate[0], state.rate[0]],
        d_rate: [acc, acc],
    }
}

/// Double inverted pendulum on an accelerating base.
///
/// `torques = [ankle, hip]`; a positive hip torque rotates the trunk forward
/// relative to the legs. With `hip_locked` the trunk is constrained to the leg
/// angle and the constrained equation (sum of both rows) is solved instead.
pub fn dip_derivative(
    state: &PlantState,
    torques: [f64; 2],
    dist: &DisturbanceInputs,
    params: &DipParams,
    hip_locked: bool,
) -> Derivative {
    let [th1, th2] = state.sway;
    let [w1, w2] = if hip_locked {
        [state.rate[0], state.rate[0]]
    } else {
        state.rate
    };
    let th2 = if hip_locked { th1 } else { th2 };
    let m = params.mass_matrix(th1, th2);
    let k = params.l1 * params.s2 * (th1 - th2).sin();
    let c1 = k * w2 * w2;
    let c2 = -k * w1 * w1;
    let g = params.gravity;
    let acc = dist.support_accel;
    let lower = params.s1 + params.m2 * params.l1;
    let (s1, co1) = th1.sin_cos();
    let (s2, co2) = th2.sin_cos();
    let q1 = lower * (g * s1 - acc * co1) + torques[0] - torques[1]
        + dist.contact_torque
        + params.eccentric_torque * co1;
    let q2 = params.s2 * (g * s2 - acc * co2) + torques[1];

    if hip_locked {
        let inertia = m[0][0] + 2.0 * m[0][1] + m[1][1];
        let a = (q1 + q2 - c1 - c2) / inertia;
        return Derivative {
            d_sway: [w1, w1],
            d_rate: [a, a],
        };
    }

    let r1 = q1 - c1;
    let r2 = q2 - c2;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!(
        det > 0.0,
        "double pendulum mass matrix is singular (det = {det})"
    );
    Derivative {
        d_sway: [w1, w2],
        d_rate: [
            (m[1][1] * r1 - m[0][1] * r2) / det,
            (m[0][0] * r2 - m[1][0] * r1) / det,
        ],
    }
}

/// Kinetic plus gravitational potential energy of the two-link body on a
/// level, static support (potential zero at the ankle).
pub fn dip_energy(state: &PlantState, params: &DipParams) -> f64 {
    let [th1, th2] = state.sway;
    let [w1, w2] = state.rate;
    let m = params.mass_matrix(th1, th2);
    let kinetic = 0.5 * (m[0][0] * w1 * w1 + 2.0 * m[0][1] * w1 * w2 + m[1][1] * w2 * w2);
    let lower = params.s1 + params.m2 * params.l1;
    let potential = params.gravity * (lower * th1.cos() + params.s2 * th2.cos())
        - params.eccentric_torque * th1.sin();
    kinetic + potential
}

/// Plant instance: body parameters merged with any added mass, for one
/// configuration.
#[derive(Debug, Clone)]
pub struct Plant {
    configuration: Configuration,
    sip: SipParams,
    dip: Option<DipParams>,
}

impl Plant {
    pub fn new(
        model: &AnthropometricModel,
        added: Option<&AddedMass>,
        configuration: Configuration,
    ) -> Result<Self> {
        model.validate()?;
        if let Some(a) = added {
            a.validate()?;
        }
        let dip = match configuration {
            Configuration::Sip => None,
            Configuration::Dip | Configuration::DipHipLocked => Some(DipParams::new(model, added)?),
        };
        Ok(Self {
            configuration,
            sip: SipParams::new(model, added),
            dip,
        })
    }

    pub fn configuration(&self) -> Configuration {
        self.configuration
    }

    pub fn sip_params(&self) -> &SipParams {
        &self.sip
    }

    pub fn dip_params(&self) -> Option<&DipParams> {
        self.dip.as_ref()
    }

    pub fn derivative(
        &self,
        state: &PlantState,
        torques: [f64; 2],
        dist: &DisturbanceInputs,
    ) -> Derivative {
        match (self.configuration, &self.dip) {
            (Configuration::Sip, _) => sip_derivative(state, torques[0], dist, &self.sip),
            (Configuration::Dip, Some(p)) => dip_derivative(state, torques, dist, p, false),
            (Configuration::DipHipLocked, Some(p)) => dip_derivative(state, torques, dist, p, true),
            _ => unreachable!("two-link parameters are built with the plant"),
        }
    }
}

/// Longest internal RK4 substep.
pub const MAX_SUBSTEP_S: f64 = 0.005;

fn rk4(
    plant: &Plant,
    state: &PlantState,
    torques: [f64; 2],
    dist: &DisturbanceInputs,
    h: f64,
) -> PlantState {
    let offset = |s: &PlantState, d: &Derivative, h: f64| PlantState {
        sway: [s.sway[0] + h * d.d_sway[0], s.sway[1] + h * d.d_sway[1]],
        rate: [s.rate[0] + h * d.d_rate[0], s.rate[1] + h * d.d_rate[1]],
        fs: s.fs,
    };
    let k1 = plant.derivative(state, torques, dist);
    let k2 = plant.derivative(&offset(state, &k1, h / 2.0), torques, dist);
    let k3 = plant.derivative(&offset(state, &k2, h / 2.0), torques, dist);
    let k4 = plant.derivative(&offset(state, &k3, h), torques, dist);
    let mut next = *state;
    for i in 0..2 {
        next.sway[i] +=
            h / 6.0 * (k1.d_sway[i] + 2.0 * k2.d_sway[i] + 2.0 * k3.d_sway[i] + k4.d_sway[i]);
        next.rate[i] +=
            h / 6.0 * (k1.d_rate[i] + 2.0 * k2.d_rate[i] + 2.0 * k3.d_rate[i] + k4.d_rate[i]);
    }
    next
}

/// Advances the plant by `dt` with inputs held constant, using classical
/// fourth-order Runge-Kutta over equal substeps of at most [`MAX_SUBSTEP_S`].
///
/// The foot-in-space angle is set from `dist.support_tilt`; it does not enter
/// the in-space dynamics because the ankle lies on the tilt axis.
pub fn integrate_step(
    plant: &Plant,
    state: &PlantState,
    torques: [f64; 2],
    dist: &DisturbanceInputs,
    dt: f64,
) -> Result<PlantState> {
    if !(dt > 0.0 && dt <= MAX_STEP_S) {
        return Err(Error::param(
            "dt",
            format!("must be in (0, {MAX_STEP_S}], got {dt}"),
        ));
    }
    let substeps = (dt / MAX_SUBSTEP_S - 1e-9).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;
    let mut next = *state;
    for _ in 0..substeps {
        next = rk4(plant, &next, torques, dist, h);
    }
    next.fs = dist.support_tilt;
    if !next.is_finite() {
        return Err(Error::NonFiniteState);
    }
    Ok(next)
}

/// Whole-body CoM sway: the angle from vertical of the line from the ankle
/// to the CoM, with segment positions from planar forward kinematics.
///
/// `segment_sways` holds one in-space angle per model segment.
pub fn com_sway(segment_sways: &[f64], model: &AnthropometricModel) -> Result<f64> {
    if segment_sways.len() != model.segments.len() {
        return Err(Error::Mismatch(format!(
            "{} segment sways for a {}-segment model",
            segment_sways.len(),
            model.segments.len()
        )));
    }
    if let Some(&first) = segment_sways.first() {
        if segment_sways.iter().all(|&a| a == first) {
            return Ok(first);
        }
    }
    let (mut x, mut z) = (0.0, 0.0);
    let (mut jx, mut jz) = (0.0, 0.0);
    for (seg, &a) in model.segments.iter().zip(segment_sways) {
        let (s, c) = a.sin_cos();
        x += seg.mass_kg * (jx + seg.com_offset_m * s);
        z += seg.mass_kg * (jz + seg.com_offset_m * c);
        jx += seg.length_m * s;
        jz += seg.length_m * c;
    }
    Ok(x.atan2(z))
}
