//! Calibration fixtures: caps for the ratio suites are produced by a
//! calibrate run (1.5x the observed maxima), stored together with a hash of
//! the generating configuration, and verification refuses to run against
//! caps from a different configuration.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Inflation applied to observed maxima when freezing caps.
pub const CAP_SAFETY: f64 = 1.5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixtures {
    pub suite: String,
    pub config_hash: String,
    pub caps: BTreeMap<String, f64>,
}

impl Fixtures {
    pub fn from_observed(
        suite: &str,
        config_hash: &str,
        observed: &BTreeMap<String, f64>,
    ) -> Self {
        let caps = observed
            .iter()
            .map(|(k, v)| (k.clone(), v * CAP_SAFETY))
            .collect();
        Self {
            suite: suite.to_string(),
            config_hash: config_hash.to_string(),
            caps,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Reject fixtures generated from a different configuration.
    pub fn check_hash(&self, expected: &str) -> Result<()> {
        if self.config_hash != expected {
            return Err(Error::config(format!(
                "fixtures for suite '{}' were calibrated against config hash {}, \
                 current config hashes to {}; re-run calibrate",
                self.suite, self.config_hash, expected
            )));
        }
        Ok(())
    }

    pub fn cap_for(&self, case_id: &str) -> Option<f64> {
        self.caps.get(case_id).copied()
    }
}

/// Canonical hash of any serializable configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serialization cannot fail");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
