//! JSON experiment configs.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sumdim_core::boxdim::{BoundSelection, DEFAULT_TOLERANCE};
use sumdim_core::SetGenerator;

use crate::{CliError, CliResult};

/// A parsed config with the raw bytes kept for hashing.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub bytes: Vec<u8>,
    pub warnings: Vec<String>,
}

/// Reads and parses `path`; unknown keys and type errors name the field.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<Loaded<T>> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        value,
        bytes,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxdimConfig {
    #[serde(rename = "E", alias = "e")]
    pub e: SetGenerator,
    #[serde(rename = "K", alias = "k")]
    pub k: SetGenerator,
    pub base: u32,
    pub levels: Vec<u32>,
    #[serde(default = "default_bound")]
    pub bound: BoundSelection,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_bound() -> BoundSelection {
    BoundSelection::Trivial
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl BoxdimConfig {
    /// Checks ranges and sorts levels ascending, returning any warnings.
    pub fn validate(&mut self) -> CliResult<Vec<String>> {
        let mut warnings = Vec::new();
        if self.base < 2 {
            return Err(CliError::Usage("base must be ≥ 2".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(CliError::Usage(format!("tolerance must be ≥ 0, got {}", self.tolerance)));
        }
        if !self.levels.windows(2).all(|w| w[0] < w[1]) {
            let before = self.levels.clone();
            self.levels.sort_unstable();
            self.levels.dedup();
            warnings.push(format!("levels {before:?} normalized to {:?}", self.levels));
        }
        if self.levels.len() < 2 {
            return Err(CliError::Usage("levels must contain at least two distinct values".into()));
        }
        Ok(warnings)
    }
}

pub fn load_boxdim(path: &Path) -> CliResult<Loaded<BoxdimConfig>> {
    let mut loaded: Loaded<BoxdimConfig> = load_json(path)?;
    loaded.warnings = loaded.value.validate()?;
    Ok(loaded)
}
