//! Pipeline configuration: a single JSON document drives every stage.
//!
//! Relative `data_path`/`output_dir` entries are interpreted relative to the
//! directory containing the config file; [`load`] returns that base
//! directory alongside the parsed value so callers resolve paths at use.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boosted_trees::TrainParams;
use crate::data_model::HdiGoalposts;
use crate::evaluation::CvConfig;
use crate::report::sha256_hex;
use crate::similarity::{DEFAULT_EPSILON, DEFAULT_K};

/// Forecast window: `horizon` consecutive years starting at `first_year`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    pub first_year: i32,
    pub horizon: usize,
}

/// Root configuration for a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Long-format panel CSV (`country,indicator,year,value`).
    pub data_path: PathBuf,
    /// Indicator code treated as the prediction target.
    pub target_code: String,
    /// Country codes to process.
    pub countries: Vec<String>,
    /// Last year of the training window; later years are held out.
    pub boundary_year: i32,
    /// Match threshold for the edit-distance ranking (on z-scored values).
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Number of top-ranked predictors fed to the model.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Optional replacement for the built-in hyperparameter grid.
    #[serde(default)]
    pub grid: Option<Vec<TrainParams>>,
    /// Expanding-window cross-validation shape.
    #[serde(default)]
    pub cv: CvConfig,
    /// Forecast window emitted by the final stage.
    pub forecast: ForecastConfig,
    /// Optional replacement for the default composition goalposts.
    #[serde(default)]
    pub goalposts: Option<HdiGoalposts>,
    /// Seed for any stochastic test fixtures; the pipeline itself is
    /// deterministic and never draws random numbers.
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving every artifact; created if absent.
    pub output_dir: PathBuf,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_k() -> usize {
    DEFAULT_K
}

/// One violated configuration invariant, named by its JSON field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Parse a config file. Returns the config plus the directory that relative
/// paths inside it are resolved against (the file's parent).
pub fn load(path: &Path) -> Result<(PipelineConfig, PathBuf), ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((config, base_dir_of(path)))
}

fn base_dir_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

impl PipelineConfig {
    /// Check every statically checkable invariant and report all failures,
    /// not just the first. `boundary_year` depends on the data range and is
    /// validated when the panel is loaded.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        if self.data_path.as_os_str().is_empty() {
            violations.push(Violation::new("data_path", "must not be empty"));
        }
        if self.target_code.is_empty() {
            violations.push(Violation::new("target_code", "must not be empty"));
        }
        if self.countries.is_empty() {
            violations.push(Violation::new(
                "countries",
                "must list at least one country code",
            ));
        }
        for (i, code) in self.countries.iter().enumerate() {
            if code.is_empty() {
                violations.push(Violation::new(
                    format!("countries[{i}]"),
                    "must not be empty",
                ));
            } else if self.countries[..i].contains(code) {
                violations.push(Violation::new(
                    format!("countries[{i}]"),
                    format!("duplicate country code {code:?}"),
                ));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            violations.push(Violation::new(
                "epsilon",
                format!("must be finite and non-negative, got {}", self.epsilon),
            ));
        }
        if self.k == 0 {
            violations.push(Violation::new("k", "must be at least 1"));
        }
        if let Some(grid) = &self.grid {
            if grid.is_empty() {
                violations.push(Violation::new(
                    "grid",
                    "override must contain at least one entry",
                ));
            }
            for (i, params) in grid.iter().enumerate() {
                if let Err(e) = params.validate() {
                    violations.push(Violation::new(format!("grid[{i}]"), e.to_string()));
                }
            }
        }
        if self.cv.min_train < 2 {
            violations.push(Violation::new("cv.min_train", "must be at least 2"));
        }
        if self.cv.horizon == 0 {
            violations.push(Violation::new("cv.horizon", "must be at least 1"));
        }
        if self.forecast.horizon == 0 {
            violations.push(Violation::new("forecast.horizon", "must be at least 1"));
        }
        if let Some(goalposts) = &self.goalposts {
            if let Err(e) = goalposts.validate() {
                violations.push(Violation::new("goalposts", e.to_string()));
            }
        }
        if self.output_dir.as_os_str().is_empty() {
            violations.push(Violation::new("output_dir", "must not be empty"));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Canonical single-line JSON form: field order is fixed by the struct
    /// declaration, so equal configs always serialize identically.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }

    /// Hash of the canonical form; recorded in the run manifest.
    pub fn sha256(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}
