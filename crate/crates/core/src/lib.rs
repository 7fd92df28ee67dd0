//! Posture-control benchmarking workbench.
//!
//! Synthesizes support-surface perturbations, simulates a balancing
//! inverted-pendulum body on a modeled motion platform, and scores
//! disturbance rejection with cross-correlation and spectral metrics.

pub mod controller;
pub mod error;
pub mod io;
pub mod metrics;
pub mod perturbation;
pub mod plant;
pub mod signal;
pub mod testbench;

pub use error::{Error, Result};
pub use signal::SignalSeries;
