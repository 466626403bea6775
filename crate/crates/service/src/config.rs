//! Server configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use wander_core::gateway::BackendMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub museum: PathBuf,
    pub bind: String,
    pub port: u16,
    pub backend: BackendMode,
    /// Rule file for the scripted backend.
    pub rules: PathBuf,
    /// Directory with `<bot>.txt` templates; built-in prompts when unset.
    pub prompts: Option<PathBuf>,
    /// Guide walking speed, m/s.
    pub speed: f64,
    pub tick_hz: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            museum: PathBuf::from("fixtures/museum35.json"),
            bind: "127.0.0.1".into(),
            port: 8080,
            backend: BackendMode::Scripted,
            rules: PathBuf::from("fixtures/scripted_rules.json"),
            prompts: None,
            speed: wander_core::nav::DEFAULT_SPEED,
            tick_hz: 10.0,
        }
    }
}

impl ServiceConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: ServiceConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(ConfigError::Invalid(format!("speed must be positive, got {}", self.speed)));
        }
        if !(self.tick_hz.is_finite() && self.tick_hz > 0.0) {
            return Err(ConfigError::Invalid(format!("tick_hz must be positive, got {}", self.tick_hz)));
        }
        Ok(())
    }

    pub fn tick_dt(&self) -> f64 {
        1.0 / self.tick_hz
    }
}
