use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tollgate_core::engine::EngineConfig;
use tollgate_core::Money;

use crate::SimError;

/// Share of the population in each vehicle class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fractions {
    pub tagged_active: f64,
    pub tagged_inactive: f64,
    pub untagged_registered: f64,
    pub unregistered: f64,
    pub stolen: f64,
}

impl Default for Fractions {
    fn default() -> Self {
        Self {
            tagged_active: 0.6,
            tagged_inactive: 0.1,
            untagged_registered: 0.1,
            unregistered: 0.15,
            stolen: 0.05,
        }
    }
}

impl Fractions {
    pub fn all_active() -> Self {
        Self {
            tagged_active: 1.0,
            tagged_inactive: 0.0,
            untagged_registered: 0.0,
            unregistered: 0.0,
            stolen: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.tagged_active,
            self.tagged_inactive,
            self.untagged_registered,
            self.unregistered,
            self.stolen,
        ]
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let sum: f64 = self.as_array().iter().sum();
        if self.as_array().iter().any(|f| !(0.0..=1.0).contains(f)) || (sum - 1.0).abs() > 1e-9 {
            return Err(SimError::BadFractions(sum));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraMode {
    /// Render a scene per passage and let the target read it.
    #[default]
    Scene,
    /// Send the true plate digits as a reading; skips the vision pipeline.
    Truth,
}

/// Credentials for driving a running service.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpSettings {
    pub admin_email: String,
    pub admin_password: String,
    pub plaza_keys: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub n_vehicles: usize,
    pub fractions: Fractions,
    pub rfid_read_failure_rate: f64,
    pub scene_noise_rate: f64,
    pub ticks_between_arrivals: u64,
    pub plazas: Vec<String>,
    /// Passages per vehicle; more than one exercises last_seen tracking.
    pub passages_per_vehicle: usize,
    /// Prepaid balance of every registered owner.
    pub initial_balance: Money,
    pub camera: CameraMode,
    /// Must match the target's settings; the final sweep runs after the
    /// last arrival plus `engine.deadline_ticks`.
    pub engine: EngineConfig,
    pub http: HttpSettings,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_vehicles: 100,
            fractions: Fractions::default(),
            rfid_read_failure_rate: 0.05,
            scene_noise_rate: 0.0,
            ticks_between_arrivals: 10,
            plazas: vec!["north".into(), "south".into()],
            passages_per_vehicle: 1,
            initial_balance: 100,
            camera: CameraMode::Scene,
            engine: EngineConfig::default(),
            http: HttpSettings::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::BadConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.fractions.validate()?;
        let bad = |m: String| Err(SimError::BadConfig(m));
        if !(0.0..=1.0).contains(&self.rfid_read_failure_rate) {
            return bad(format!("rfid_read_failure_rate {} is outside [0, 1]", self.rfid_read_failure_rate));
        }
        if !(0.0..=tollgate_plate::corpus::MAX_NOISE_RATE).contains(&self.scene_noise_rate) {
            return bad(format!("scene_noise_rate {} is outside [0, 0.2]", self.scene_noise_rate));
        }
        if self.ticks_between_arrivals == 0 {
            return bad("ticks_between_arrivals must be positive".into());
        }
        if self.plazas.is_empty() || self.plazas.iter().any(|p| p.trim().is_empty()) {
            return bad("plazas must be a non-empty list of names".into());
        }
        if self.passages_per_vehicle == 0 {
            return bad("passages_per_vehicle must be at least 1".into());
        }
        if self.initial_balance < 0 {
            return bad("initial_balance must not be negative".into());
        }
        Ok(())
    }
}
