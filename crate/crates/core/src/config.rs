//! Experiment configuration: a flat key-value document.
//!
//! The same keys are accepted from a TOML file (`key = value`) and from a
//! two-column `setting,value` CSV, which is also the format of the
//! `settings.csv` artifact, so a run directory can be replayed directly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::interp_rbf::{Kernel, RbfConfig};
use crate::synthdata::NoiseSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CubicInterpolator {
    #[default]
    #[serde(rename = "clough_tocher", alias = "CloughTocher2DInterpolator")]
    CloughTocher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub random_seed: u64,
    pub repeats_per_slice: usize,
    pub train_fraction: f64,
    pub bootstrap_resamples: usize,
    pub rbf_kernel: Kernel,
    pub rbf_smoothing: f64,
    pub rbf_epsilon: f64,
    pub cubic_interpolator: CubicInterpolator,
    pub noise_sigma_output1: f64,
    pub noise_sigma_output2: f64,
    pub noise_sigma_output3: f64,
    pub grid_resolution: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            random_seed: 42,
            repeats_per_slice: 40,
            train_fraction: 0.7,
            bootstrap_resamples: 1000,
            rbf_kernel: Kernel::Multiquadric,
            rbf_smoothing: 0.0,
            rbf_epsilon: 1.0,
            cubic_interpolator: CubicInterpolator::CloughTocher,
            noise_sigma_output1: 0.1,
            noise_sigma_output2: 1.0,
            noise_sigma_output3: 2.0,
            grid_resolution: 50,
        }
    }
}

/// Coverage of every bootstrap interval in the summary.
pub const CI_LEVEL: f64 = 0.95;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.repeats_per_slice == 0 {
            return bad("repeats_per_slice must be at least 1".into());
        }
        if self.bootstrap_resamples == 0 {
            return bad("bootstrap_resamples must be at least 1".into());
        }
        if self.grid_resolution < 2 {
            return bad(format!("grid_resolution must be at least 2, got {}", self.grid_resolution));
        }
        self.noise().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.rbf().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            sigma: [self.noise_sigma_output1, self.noise_sigma_output2, self.noise_sigma_output3],
            master_seed: self.random_seed,
        }
    }

    pub fn rbf(&self) -> RbfConfig {
        RbfConfig {
            kernel: self.rbf_kernel,
            epsilon: self.rbf_epsilon,
            smoothing: self.rbf_smoothing,
            ..RbfConfig::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `(key, value)` pairs in declaration order.
    pub fn settings(&self) -> Vec<(String, String)> {
        let Value::Object(map) = serde_json::to_value(self).expect("config serializes") else {
            unreachable!("config is a struct")
        };
        map.into_iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, s)
            })
            .collect()
    }

    pub fn to_settings_csv(&self) -> String {
        let mut out = String::from("setting,value\n");
        for (k, v) in self.settings() {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }

    pub fn from_settings_csv(text: &str) -> Result<Self, ConfigError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| ConfigError::Parse(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "setting" || &headers[1] != "value" {
            return Err(ConfigError::Parse("settings CSV must have header `setting,value`".into()));
        }
        let mut map = Map::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| ConfigError::Parse(e.to_string()))?;
            let raw = &rec[1];
            // numbers and booleans parse as JSON scalars; anything else is a string
            let value = serde_json::from_str::<Value>(raw)
                .ok()
                .filter(|v| v.is_number() || v.is_boolean())
                .unwrap_or_else(|| Value::String(raw.to_string()));
            map.insert(rec[0].to_string(), value);
        }
        let cfg: Self = serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a `.csv` settings file or a TOML document.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            Self::from_settings_csv(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// SHA-256 of the canonical settings CSV, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_settings_csv().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_values() {
        let c = ExperimentConfig::default();
        assert_eq!(c.random_seed, 42);
        assert_eq!(c.repeats_per_slice, 40);
        assert_eq!(c.train_fraction, 0.7);
        assert_eq!(c.bootstrap_resamples, 1000);
        assert_eq!(c.rbf_kernel, Kernel::Multiquadric);
        assert_eq!(c.rbf_smoothing, 0.0);
        assert_eq!(c.noise().sigma, [0.1, 1.0, 2.0]);
        c.validate().unwrap();
    }

    #[test]
    fn settings_csv_round_trip() {
        let c = ExperimentConfig { train_fraction: 0.65, rbf_epsilon: 1.0 / 3.0, ..Default::default() };
        let csv = c.to_settings_csv();
        assert!(csv.starts_with("setting,value\nrandom_seed,42\n"));
        assert_eq!(ExperimentConfig::from_settings_csv(&csv).unwrap(), c);
    }

    #[test]
    fn toml_overrides_and_aliases() {
        let c = ExperimentConfig::from_toml_str(
            "random_seed = 7\nrbf_smoothing = 0.5\ncubic_interpolator = \"CloughTocher2DInterpolator\"\n",
        )
        .unwrap();
        assert_eq!(c.random_seed, 7);
        assert_eq!(c.rbf_smoothing, 0.5);
        assert_eq!(c.repeats_per_slice, 40);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(ExperimentConfig::from_toml_str("bogus_key = 1"), Err(ConfigError::Parse(_))));
        assert!(matches!(ExperimentConfig::from_toml_str("train_fraction = 1.5"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ExperimentConfig::from_toml_str("noise_sigma_output2 = -1.0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ExperimentConfig::from_settings_csv("a,b\n"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { random_seed: 43, ..Default::default() };
        assert_eq!(a.hash(), ExperimentConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
