//! Sagittal-plane inverted-pendulum body on a moving support.
//!
//! Segment angles are measured in space (from the gravitational vertical),
//! positive forward. The foot follows the platform, so the foot-in-space
//! angle FS equals the support tilt and joint angles are differences of
//! in-space angles.

mod dynamics;
mod model;

pub use dynamics::{
    com_sway, dip_derivative, dip_energy, integrate_step, sip_derivative, Configuration,
    Derivative, DipParams, DisturbanceInputs, Plant, PlantState, SipParams, MAX_STEP_S,
    MAX_SUBSTEP_S,
};
pub use model::{AddedMass, AnthropometricModel, Segment};
