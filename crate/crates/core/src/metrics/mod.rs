//! Disturbance-rejection scores.
//!
//! Gain and phase come from the sample cross-correlation between the
//! support input `u` and the CoM sway `a`; power is the mean squared sway.
//! Series are expected to be trimmed to an integer number of steady-state
//! stimulus periods first ([`trim_steady_state`]).

mod frf;
mod scores;
mod xcorr;

pub use frf::{compare_to_reference, estimate_frf, stimulus_harmonics, FrfResult, LikenessWeights};
pub use scores::{gain, normalize_torque, phase, power, trim_steady_state, wrap_angle};
pub use xcorr::{cross_correlate, CrossCorrelation};
