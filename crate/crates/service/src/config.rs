//! Service configuration from flags or a TOML file.

use std::net::SocketAddr;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("poll interval must be greater than zero")]
    ZeroPollInterval,
    #[error("at least one port must be registered")]
    NoPorts,
    #[error("reading config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Runtime settings for the control service.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ServiceConfig {
    /// Listen address for the REST API.
    pub listen: SocketAddr,
    /// Counter polling interval in milliseconds.
    pub poll_interval_ms: u64,
    /// Ternary table capacity per port.
    pub capacity: usize,
    /// RX ports to register.
    pub ports: Vec<u16>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".parse().expect("static address"),
            poll_interval_ms: 500,
            capacity: histeval_core::tcam::DEFAULT_TABLE_CAPACITY,
            ports: vec![0],
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let config: ServiceConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.poll_interval_ms == 0 {
            return Err(ConfigError::ZeroPollInterval);
        }
        if self.ports.is_empty() {
            return Err(ConfigError::NoPorts);
        }
        Ok(())
    }

    pub fn poll_interval(&self) -> Duration {
        Duration::from_millis(self.poll_interval_ms)
    }
}
