use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LUCY_DEFAULT: &str = include_str!("../../configs/lucy-default.toml");

/// One rigid body segment above the ankle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub name: String,
    pub mass_kg: f64,
    pub length_m: f64,
    /// Distance of the segment CoM from its lower (distal) joint.
    pub com_offset_m: f64,
    /// Moment of inertia about the segment's own CoM.
    pub inertia_kgm2: f64,
}

/// Segment masses and geometry of the balancing body, ordered from the
/// ankle upwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnthropometricModel {
    #[serde(default)]
    pub name: String,
    pub segments: Vec<Segment>,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
}

fn default_gravity() -> f64 {
    9.81
}

impl AnthropometricModel {
    pub fn new(name: impl Into<String>, segments: Vec<Segment>, gravity: f64) -> Result<Self> {
        let m = Self {
            name: name.into(),
            segments,
            gravity,
        };
        m.validate()?;
        Ok(m)
    }

    /// The bundled 1.5 m / 16.5 kg two-segment humanoid.
    pub fn lucy_default() -> Self {
        Self::from_toml(LUCY_DEFAULT).expect("bundled model is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let m: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner().message())))?;
        m.validate()?;
        Ok(m)
    }

    /// A single rigid segment with its whole mass concentrated at `com_height_m`.
    pub fn point_mass(mass_kg: f64, com_height_m: f64, gravity: f64) -> Result<Self> {
        Self::new(
            "point-mass",
            vec![Segment {
                name: "body".into(),
                mass_kg,
                length_m: com_height_m * 2.0,
                com_offset_m: com_height_m,
                inertia_kgm2: 0.0,
            }],
            gravity,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::param("segments", "at least one segment is required"));
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return Err(Error::param("gravity", "must be > 0"));
        }
        for s in &self.segments {
            if !(s.mass_kg.is_finite() && s.mass_kg > 0.0) {
                return Err(Error::param(
                    "mass_kg",
                    format!("segment `{}` must have mass > 0", s.name),
                ));
            }
            if !(s.length_m.is_finite() && s.length_m > 0.0) {
                return Err(Error::param(
                    "length_m",
                    format!("segment `{}` must have length > 0", s.name),
                ));
            }
            if !(s.com_offset_m.is_finite() && s.com_offset_m >= 0.0) {
                return Err(Error::param(
                    "com_offset_m",
                    format!("segment `{}`: must be >= 0", s.name),
                ));
            }
            if !(s.inertia_kgm2.is_finite() && s.inertia_kgm2 >= 0.0) {
                return Err(Error::param(
                    "inertia_kgm2",
                    format!("segment `{}`: must be >= 0", s.name),
                ));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.mass_kg).sum()
    }

    /// Upright height of each segment CoM above the ankle.
    pub fn segment_com_heights(&self) -> Vec<f64> {
        let mut base = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let z = base + s.com_offset_m;
                base += s.length_m;
                z
            })
            .collect()
    }

    /// Σ mᵢ·zᵢ, the first mass moment about the ankle when upright.
    pub fn mass_moment(&self) -> f64 {
        self.segments
            .iter()
            .zip(self.segment_com_heights())
            .map(|(s, z)| s.mass_kg * z)
            .sum()
    }

    /// Whole-body CoM height above the ankle when upright.
    pub fn com_height(&self) -> f64 {
        self.mass_moment() / self.total_mass()
    }

    pub fn mgh(&self) -> f64 {
        self.total_mass() * self.gravity * self.com_height()
    }

    /// Moment of inertia of the rigid (all joints locked) body about the ankle.
    pub fn inertia_about_ankle(&self) -> f64 {
        self.segments
            .iter()
            .zip(self.segment_com_heights())
            .map(|(s, z)| s.inertia_kgm2 + s.mass_kg * z * z)
            .sum()
    }

    pub fn height(&self) -> f64 {
        self.segments.iter().map(|s| s.length_m).sum()
    }
}

/// A point mass rigidly fixed to the body, possibly in front of the
/// ankle-hip plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddedMass {
    pub mass_kg: f64,
    pub height_m: f64,
    /// Forward offset from the body plane through ankle and hip.
    #[serde(default)]
    pub eccentricity_m: f64,
}

impl AddedMass {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass_kg.is_finite() && self.mass_kg >= 0.0) {
            return Err(Error::param("added_mass.mass_kg", "must be >= 0"));
        }
        if !(self.height_m.is_finite() && self.height_m >= 0.0) {
            return Err(Error::param("added_mass.height_m", "must be >= 0"));
        }
        if !self.eccentricity_m.is_finite() {
            return Err(Error::param("added_mass.eccentricity_m", "must be finite"));
        }
        Ok(())
    }
}
