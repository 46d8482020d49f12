//! Single JSON configuration for a whole analysis run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{KinematicParams, KinematicsError};
use crate::predictors::{PredictorConfig, PredictorError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Json {
        path: std::path::PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Predictors(#[from] PredictorError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationParams {
    /// Permutations per distance-correlation test.
    pub n_permutations: usize,
}

impl Default for EvaluationParams {
    fn default() -> Self {
        Self {
            n_permutations: 1000,
        }
    }
}

/// Every section is optional in the file; missing ones take their defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub kinematics: KinematicParams,
    pub predictors: PredictorConfig,
    pub evaluation: EvaluationParams,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.kinematics.validate()?;
        self.predictors.validate()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config = Self::from_json(&text).map_err(|source| ConfigError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(
            AnalysisConfig::from_json("{}").unwrap(),
            AnalysisConfig::default()
        );
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let c = AnalysisConfig::from_json(
            r#"{"kinematics": {"dt": 0.01}, "predictors": {"thresholds": {"composite": 5}}}"#,
        )
        .unwrap();
        assert_eq!(c.kinematics.dt, 0.01);
        assert_eq!(c.kinematics.smoothing_window, 5);
        assert_eq!(c.predictors.thresholds.composite, 5);
        assert_eq!(c.predictors.thresholds.min_pttc, 0.7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(AnalysisConfig::from_json(r#"{"kinematic": {}}"#).is_err());
    }
}
