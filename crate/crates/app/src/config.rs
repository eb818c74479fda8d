//! TOML settings file.
//!
//! ```toml
//! host = "127.0.0.1"
//! port = 8080
//!
//! [models]
//! demo = "models/demo"     # relative to the config file
//!
//! [defaults]
//! elambda = 15.0
//! bins = 20
//! samples = 2000
//! burnin = 500
//! ```
//!
//! `ICEPM_PORT` overrides `port`; a `--port` flag overrides both.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const PORT_ENV: &str = "ICEPM_PORT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Defaults {
    pub elambda: f64,
    pub bins: usize,
    pub samples: usize,
    pub burnin: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { elambda: 15.0, bins: crate::ops::DEFAULT_BINS, samples: 2000, burnin: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub host: String,
    pub port: u16,
    pub models: BTreeMap<String, PathBuf>,
    pub defaults: Defaults,
}

impl Default for Config {
    fn default() -> Self {
        Config { host: "127.0.0.1".into(), port: 8080, models: BTreeMap::new(), defaults: Defaults::default() }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, AppError> {
        toml::from_str(text).map_err(|e| AppError::input(format!("config: {e}")))
    }

    /// Reads a file and resolves model paths against its directory.
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for dir in cfg.models.values_mut() {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(cfg)
    }

    /// Applies the port variable when set.
    pub fn apply_env(&mut self, port_var: Option<&str>) -> Result<(), AppError> {
        if let Some(v) = port_var {
            self.port = v.trim().parse().map_err(|_| AppError::input(format!("{PORT_ENV}={v:?} is not a port")))?;
        }
        Ok(())
    }
}
