//! Trial configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::controller::{ControllerConfig, ControllerKind};
use crate::error::{Error, Result};
use crate::perturbation::PerturbationProfile;
use crate::plant::{AddedMass, AnthropometricModel, Configuration};
use crate::testbench::{PlatformModel, Scenario, TrialSpec};

/// Overrides the default model when a config names none.
pub const MODEL_ENV: &str = "POSTUREBENCH_MODEL";

const BUNDLED_MODELS: &[(&str, &str)] = &[(
    "lucy-default",
    include_str!("../../configs/lucy-default.toml"),
)];

const BUNDLED_CONFIGS: &[(&str, &str)] = &[
    (
        "tilt-sine-nominal",
        include_str!("../../configs/tilt-sine-nominal.toml"),
    ),
    (
        "tilt-sine-added-mass",
        include_str!("../../configs/tilt-sine-added-mass.toml"),
    ),
    ("tilt-prts", include_str!("../../configs/tilt-prts.toml")),
    ("bsrp", include_str!("../../configs/bsrp.toml")),
];

pub fn bundled_config_names() -> impl Iterator<Item = &'static str> {
    BUNDLED_CONFIGS.iter().map(|(n, _)| *n)
}

/// Source text of a bundled trial config.
pub fn bundled_config(name: &str) -> Option<&'static str> {
    BUNDLED_CONFIGS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

pub fn bundled_model(name: &str) -> Option<AnthropometricModel> {
    let text = BUNDLED_MODELS.iter().find(|(n, _)| *n == name)?.1;
    Some(AnthropometricModel::from_toml(text).expect("bundled model is valid"))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ModelRef {
    /// A bundled preset name or a path to a model file.
    Named(String),
    Inline(AnthropometricModel),
}

/// Controller section: only `kind` is required, other fields default from
/// the (unloaded) body model.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerSection {
    kind: Option<ControllerKind>,
    kp: Option<f64>,
    kd: Option<f64>,
    nominal_mgh: Option<f64>,
    nominal_inertia: Option<f64>,
    tilt_deadzone: Option<f64>,
    tilt_cutoff_hz: Option<f64>,
    contact_gain: Option<f64>,
    contact_deadzone: Option<f64>,
    contact_cutoff_hz: Option<f64>,
    loop_rate_hz: Option<f64>,
    saturation: Option<f64>,
    hip_kp: Option<f64>,
    hip_kd: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Scenario,
    duration_s: f64,
    #[serde(default = "default_rate")]
    rate_hz: f64,
    #[serde(default)]
    settle_periods: Option<usize>,
    #[serde(default)]
    initial_sway: f64,
    #[serde(default)]
    fall_threshold: Option<f64>,
    #[serde(default)]
    configuration: Configuration,
    #[serde(default)]
    model: Option<ModelRef>,
    #[serde(default)]
    profile: Option<PerturbationProfile>,
    #[serde(default)]
    added_mass: Option<AddedMass>,
    #[serde(default)]
    controller: ControllerSection,
    #[serde(default)]
    platform: PlatformModel,
}

fn default_rate() -> f64 {
    100.0
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().message().trim().to_string();
        if path == "." {
            Error::Config(msg)
        } else {
            Error::Config(format!("{path}: {msg}"))
        }
    })
}

fn resolve_model(r: Option<ModelRef>, base_dir: Option<&Path>) -> Result<AnthropometricModel> {
    let name = match r {
        Some(ModelRef::Inline(m)) => {
            m.validate()
                .map_err(|e| Error::Config(format!("model: {e}")))?;
            return Ok(m);
        }
        Some(ModelRef::Named(n)) => n,
        None => match std::env::var(MODEL_ENV) {
            Ok(p) if !p.is_empty() => p,
            _ => "lucy-default".to_string(),
        },
    };
    if let Some(m) = bundled_model(&name) {
        return Ok(m);
    }
    let mut path = PathBuf::from(&name);
    if path.is_relative() {
        if let Some(dir) = base_dir {
            path = dir.join(path);
        }
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("model: cannot read `{}`: {e}", path.display())))?;
    AnthropometricModel::from_toml(&text)
        .map_err(|e| Error::Config(format!("model `{}`: {e}", path.display())))
}

/// Parses a trial config. Relative model paths resolve against `base_dir`.
pub fn parse_trial_config(text: &str, base_dir: Option<&Path>) -> Result<TrialSpec> {
    let f: ConfigFile = parse(text)?;
    let model = resolve_model(f.model, base_dir)?;
    let c = f.controller;
    let kind = c
        .kind
        .ok_or_else(|| Error::Config("controller.kind: missing field".into()))?;
    let mut ctl = ControllerConfig::for_model(kind, &model);
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut ctl.kp, c.kp);
    set(&mut ctl.kd, c.kd);
    set(&mut ctl.nominal_mgh, c.nominal_mgh);
    set(&mut ctl.nominal_inertia, c.nominal_inertia);
    set(&mut ctl.tilt_deadzone, c.tilt_deadzone);
    set(&mut ctl.tilt_cutoff_hz, c.tilt_cutoff_hz);
    set(&mut ctl.contact_gain, c.contact_gain);
    set(&mut ctl.contact_deadzone, c.contact_deadzone);
    set(&mut ctl.contact_cutoff_hz, c.contact_cutoff_hz);
    set(&mut ctl.saturation, c.saturation);
    set(&mut ctl.hip_kp, c.hip_kp);
    set(&mut ctl.hip_kd, c.hip_kd);
    ctl.loop_rate_hz = c.loop_rate_hz;

    let profile = match (f.scenario, f.profile) {
        (_, Some(p)) => p,
        (Scenario::Bsrp, None) => PerturbationProfile::zero(),
        (_, None) => return Err(Error::Config("profile: missing table".into())),
    };
    let spec = TrialSpec {
        scenario: f.scenario,
        profile,
        model,
        added_mass: f.added_mass,
        configuration: f.configuration,
        controller: ctl,
        platform: f.platform,
        duration_s: f.duration_s,
        rate_hz: f.rate_hz,
        settle_periods: f.settle_periods.unwrap_or(2),
        initial_sway: f.initial_sway,
        fall_threshold: f.fall_threshold.unwrap_or(0.5),
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

/// Loads a config from a file path, or from the bundled set by name.
pub fn load_trial_config(name_or_path: &str) -> Result<TrialSpec> {
    let path = Path::new(name_or_path);
    if path.exists() {
        let text = crate::error::read_text(path)?;
        return parse_trial_config(&text, path.parent());
    }
    match bundled_config(name_or_path) {
        Some(text) => parse_trial_config(text, None),
        None => Err(Error::Config(format!(
            "`{name_or_path}` is neither a file nor a bundled config ({})",
            bundled_config_names().collect::<Vec<_>>().join(", ")
        ))),
    }
}
