//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use roger_core::env::EnvConfig;
use roger_core::learner::LearnerConfig;
use roger_core::reward::{AdapterConfig, ConstraintSpec, EstimatorSign, StatisticBase};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// Estimator and tolerance settings shared by every constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSettings {
    /// `δᵢ = delta_fraction · τᵢ`.
    pub delta_fraction: f64,
    pub k_sigma: f64,
    pub sign: EstimatorSign,
    pub base: StatisticBase,
}

impl Default for ConstraintSettings {
    fn default() -> Self {
        Self {
            delta_fraction: 0.1,
            k_sigma: 3.0,
            sign: EstimatorSign::Plus,
            base: StatisticBase::Magnitude,
        }
    }
}

fn default_episodes() -> usize {
    500
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub adapter: AdapterConfig,
    #[serde(default)]
    pub constraints: ConstraintSettings,
    /// Falls back to [`default_learner`] for the environment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerConfig>,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Learner settings tuned per environment.
pub fn default_learner(env: &EnvConfig) -> LearnerConfig {
    match env {
        EnvConfig::Landscape(_) => LearnerConfig {
            eta_theta: 2e-4,
            eta_sigma: 2e-5,
            sigma_init: 0.1,
            sigma_min: Some(0.03),
            ..LearnerConfig::default()
        },
        EnvConfig::CartTilt(c) => LearnerConfig {
            eta_theta: 1e-4,
            eta_sigma: 5e-6,
            sigma_init: 0.4,
            sigma_min: Some(0.05),
            timesteps_per_episode: c.episode_len,
            ..LearnerConfig::default()
        },
    }
}

/// Constraint names used in log headers.
pub fn constraint_names(env: &EnvConfig) -> Vec<String> {
    match env {
        EnvConfig::Landscape(_) => vec!["hazard".into()],
        EnvConfig::CartTilt(_) => vec!["tilt".into()],
    }
}

impl ExperimentConfig {
    pub fn new(env: EnvConfig, adapter: AdapterConfig) -> Self {
        Self {
            env,
            adapter,
            constraints: ConstraintSettings::default(),
            learner: None,
            episodes: default_episodes(),
            seeds: default_seeds(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn learner(&self) -> LearnerConfig {
        self.learner
            .clone()
            .unwrap_or_else(|| default_learner(&self.env))
    }

    pub fn spec(&self) -> ConstraintSpec {
        let tau = self.env.tau();
        ConstraintSpec {
            delta: tau
                .iter()
                .map(|t| t * self.constraints.delta_fraction)
                .collect(),
            tau,
            k_sigma: self.constraints.k_sigma,
            names: constraint_names(&self.env),
            sign: self.constraints.sign,
            base: self.constraints.base,
        }
    }

    /// Checks every section; the message names the offending field.
    pub fn validate(&self) -> Result<()> {
        let config = |e: roger_core::Error| match e {
            roger_core::Error::Config(m) => LabError::Config(m),
            other => LabError::Config(other.to_string()),
        };
        self.env.validate().map_err(config)?;
        let c = &self.constraints;
        if !(0.0..1.0).contains(&c.delta_fraction) {
            return Err(LabError::Config(format!(
                "constraints.delta_fraction must lie in [0, 1), got {}",
                c.delta_fraction
            )));
        }
        if !(c.k_sigma >= 0.0 && c.k_sigma.is_finite()) {
            return Err(LabError::Config(format!(
                "constraints.k_sigma must be >= 0, got {}",
                c.k_sigma
            )));
        }
        self.spec().validate().map_err(config)?;
        self.learner().validate().map_err(config)?;
        roger_core::reward::AdapterState::from_config(&self.adapter, self.env.tau().len())
            .map_err(config)?;
        if self.seeds.is_empty() {
            return Err(LabError::Config("seeds must not be empty".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of the resolved configuration,
    /// leaving out the output directory.
    pub fn hash(&self) -> String {
        let mut resolved = self.clone();
        resolved.learner = Some(self.learner());
        resolved.output = None;
        let bytes = serde_json::to_vec(&resolved).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use roger_core::env::{CartTiltConfig, LandscapeConfig};
    use roger_core::reward::AdapterKind;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(
            r#"{"env":{"kind":"landscape"},"adapter":{"kind":"roger"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.episodes, 500);
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.env, EnvConfig::Landscape(LandscapeConfig::default()));
        assert_eq!(cfg.learner().eta_theta, 2e-4);
        let spec = cfg.spec();
        assert_eq!(spec.tau, vec![0.75]);
        assert!((spec.delta[0] - 0.075).abs() < 1e-15);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let cfg = ExperimentConfig::from_json(
            r#"{"env":{"kind":"cart_tilt","tau_tilt":-0.1},"adapter":{"kind":"roger"}}"#,
        )
        .unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("env.tau_tilt"), "{msg}");

        let mut cfg = ExperimentConfig::new(
            EnvConfig::CartTilt(CartTiltConfig::default()),
            AdapterConfig::new(AdapterKind::FixedPenalty),
        );
        assert!(cfg.validate().is_err());
        cfg.adapter.fixed_gains = Some(vec![1.0]);
        cfg.validate().unwrap();
        cfg.constraints.k_sigma = -1.0;
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("constraints.k_sigma"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ExperimentConfig::from_json(
            r#"{"env":{"kind":"landscape"},"adapter":{"kind":"roger"},"epsiodes":3}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn hash_ignores_output_and_tracks_content() {
        let mut a = ExperimentConfig::new(
            EnvConfig::Landscape(LandscapeConfig::default()),
            AdapterConfig::new(AdapterKind::Roger),
        );
        let h = a.hash();
        assert_eq!(h.len(), 64);
        a.output = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        // An explicit learner equal to the default resolves to the same hash.
        a.learner = Some(a.learner());
        assert_eq!(a.hash(), h);
        a.episodes = 10;
        assert_ne!(a.hash(), h);
    }
}
