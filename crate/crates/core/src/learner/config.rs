use alloc::format;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub eta_theta: f64,
    pub eta_sigma: f64,
    pub episodes_per_window: usize,
    /// Upper bound on steps per episode; environments may stop earlier.
    pub timesteps_per_episode: usize,
    pub return_horizon: usize,
    pub sigma_init: f64,
    /// Exploration floor; `0.1 · sigma_init` when absent.
    pub sigma_min: Option<f64>,
    /// Gains per within-episode timestep (otherwise one window-wide vector).
    pub per_timestep_gains: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            eta_theta: 0.01,
            eta_sigma: 0.01,
            episodes_per_window: 8,
            timesteps_per_episode: 70,
            return_horizon: 20,
            sigma_init: 0.1,
            sigma_min: None,
            per_timestep_gains: true,
        }
    }
}

impl LearnerConfig {
    pub fn sigma_floor(&self) -> f64 {
        self.sigma_min.unwrap_or(0.1 * self.sigma_init)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learner.eta_theta", self.eta_theta),
            ("learner.eta_sigma", self.eta_sigma),
            ("learner.sigma_init", self.sigma_init),
            ("learner.sigma_min", self.sigma_floor()),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.episodes_per_window == 0 {
            return Err(config("learner.episodes_per_window must be >= 1"));
        }
        if self.return_horizon == 0 || self.return_horizon > self.timesteps_per_episode {
            return Err(config(format!(
                "learner.return_horizon must lie in [1, {}], got {}",
                self.timesteps_per_episode, self.return_horizon
            )));
        }
        Ok(())
    }
}
