use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tollgate_core::engine::{EngineConfig, TollSchedule};

use crate::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HasherKind {
    #[default]
    Sha256,
    /// Reversible test hasher. Never use outside tests.
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdminCredentials {
    pub email: String,
    pub password: String,
}

/// Service settings, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub data_dir: PathBuf,
    pub engine: EngineConfig,
    pub schedule: TollSchedule,
    /// Pre-shared key per plaza id, sent as `x-plaza-key`.
    pub plaza_keys: BTreeMap<String, String>,
    pub admin: Option<AdminCredentials>,
    pub session_ttl_secs: u64,
    pub password_hasher: HasherKind,
    /// How often the background task drains the outbox; 0 disables it.
    pub outbox_interval_ms: u64,
    /// Default smoothing weight for `eval smooth`.
    pub ema_weight: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("data"),
            engine: EngineConfig::default(),
            schedule: TollSchedule::default(),
            plaza_keys: BTreeMap::new(),
            admin: None,
            session_ttl_secs: 3600,
            password_hasher: HasherKind::Sha256,
            outbox_interval_ms: 1000,
            ema_weight: 0.6,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative `data_dir` is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.data_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.data_dir = dir.join(&cfg.data_dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let bad = |m: &str| Err(ServiceError::Config(m.to_string()));
        if self.engine.toll_default <= 0 {
            return bad("engine.toll_default must be positive");
        }
        if self.engine.deadline_ticks == 0 {
            return bad("engine.deadline_ticks must be positive");
        }
        if self.schedule.by_class.values().any(|&a| a <= 0) {
            return bad("schedule amounts must be positive");
        }
        if self.session_ttl_secs == 0 {
            return bad("session_ttl_secs must be positive");
        }
        if !(0.0..1.0).contains(&self.ema_weight) {
            return bad("ema_weight must lie in [0, 1)");
        }
        if self.plaza_keys.values().any(|k| k.is_empty()) {
            return bad("plaza keys must be non-empty");
        }
        Ok(())
    }
}
