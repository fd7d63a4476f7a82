//! JSON configuration for the whole workbench: baseline geometry, material
//! coefficients, plant dynamics, controller, and trial bookkeeping.

use serde::{Deserialize, Serialize};

use crate::actuator_sim::PlantParams;
use crate::error::{CoreError, Result};
use crate::geometry::BaseDims;
use crate::material::{FabricElastic, YeohCoefficients};
use crate::pneumatics::ControllerConfig;
use crate::rig::RigConfig;

/// Unit the Yeoh coefficients are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StressUnit {
    #[serde(rename = "kPa")]
    #[default]
    KiloPascal,
    #[serde(rename = "MPa")]
    MegaPascal,
}

/// Material block: coefficients plus their unit, and the fabric layer
/// parameters carried as metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialConfig {
    pub c10: f64,
    pub c20: f64,
    pub c30: f64,
    #[serde(default)]
    pub unit: StressUnit,
    pub fabric: FabricConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FabricConfig {
    #[serde(rename = "E_GPa")]
    pub e_gpa: f64,
    pub nu: f64,
}

impl MaterialConfig {
    /// Coefficients converted to kPa, the unit the simulation runs in.
    pub fn yeoh_kpa(&self) -> Result<YeohCoefficients> {
        let scale = match self.unit {
            StressUnit::KiloPascal => 1.0,
            StressUnit::MegaPascal => 1000.0,
        };
        YeohCoefficients::new(self.c10 * scale, self.c20 * scale, self.c30 * scale)
    }

    pub fn fabric(&self) -> Result<FabricElastic> {
        FabricElastic::new(self.fabric.e_gpa, self.fabric.nu)
    }
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self {
            c10: 1.9e2,
            c20: 9e-4,
            c30: -4.75e-6,
            unit: StressUnit::KiloPascal,
            fabric: FabricConfig {
                e_gpa: 6.5,
                nu: 0.2,
            },
        }
    }
}

/// Top-level workbench configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkbenchConfig {
    /// Free-text provenance note for the shipped defaults.
    #[serde(default)]
    pub provenance: String,
    pub base: BaseDims,
    pub material: MaterialConfig,
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub rig: RigConfig,
    /// Fraction of each staircase hold averaged for the steady-state angle.
    #[serde(default = "default_settle_fraction")]
    pub settle_fraction: f64,
    /// Keypoint frames with any likelihood below this come back flagged.
    #[serde(default = "default_likelihood_threshold")]
    pub likelihood_threshold: f64,
}

fn default_settle_fraction() -> f64 {
    0.2
}

fn default_likelihood_threshold() -> f64 {
    0.6
}

impl Default for WorkbenchConfig {
    fn default() -> Self {
        Self {
            provenance: "Baseline chamber dimensions are approximate workshop values, \
                         not measured from any particular actuator; plant dynamics are \
                         calibrated with `pneunet sim calibrate`."
                .into(),
            base: BaseDims {
                chamber_length: 8.0,
                chamber_width: 16.0,
                chamber_height: 12.0,
                side_thickness: 2.0,
                top_thickness: 2.5,
                chamber_count: 9,
                channel_cross_section: 6.0,
                chamber_gap: 3.0,
            },
            material: MaterialConfig::default(),
            plant: PlantParams::default(),
            controller: ControllerConfig::default(),
            rig: RigConfig::default(),
            settle_fraction: default_settle_fraction(),
            likelihood_threshold: default_likelihood_threshold(),
        }
    }
}

impl WorkbenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CoreError::InvalidInput(format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.material.yeoh_kpa()?;
        self.material.fabric()?;
        self.plant.validate()?;
        self.controller.validate()?;
        self.rig.validate()?;
        if !(self.settle_fraction > 0.0 && self.settle_fraction <= 1.0) {
            return Err(CoreError::InvalidValue {
                parameter: "settle_fraction",
                value: format!("{}", self.settle_fraction),
                constraint: "must lie in (0, 1]",
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = WorkbenchConfig::default();
        let json = cfg.to_json_pretty();
        let back = WorkbenchConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn mpa_unit_scales_to_kpa() {
        let mut m = MaterialConfig::default();
        m.unit = StressUnit::MegaPascal;
        m.c10 = 0.19;
        let kpa = m.yeoh_kpa().unwrap();
        assert!((kpa.c10 - 190.0).abs() < 1e-9);
    }

    #[test]
    fn bad_config_rejected() {
        let mut cfg = WorkbenchConfig::default();
        cfg.base.chamber_count = 1;
        assert!(cfg.validate().is_err());

        let err = WorkbenchConfig::from_json("{not json").unwrap_err();
        assert!(format!("{err}").contains("config JSON"));
    }
}
