//! Closed-loop trials: platform actuation, scenario assembly and recording.

mod platform;
mod trial;

pub use platform::{apply_platform_limits, AxisTracker, PlatformModel};
pub use trial::{
    run_pair, run_trial, Channel, Outcome, Scenario, TrialMeta, TrialRecord, TrialSpec,
};
