use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// One timestep of the multi-channel reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub primary: f64,
    /// Semi-positive penalty magnitudes, one per constraint.
    pub penalties: Vec<f64>,
    pub t: usize,
}

impl ChannelSample {
    pub fn new(primary: f64, penalties: Vec<f64>, t: usize) -> Self {
        debug_assert!(penalties.iter().all(|p| *p >= 0.0));
        Self {
            primary,
            penalties,
            t,
        }
    }
}

/// Which side of the mean the confidence term is put on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSign {
    /// `mean + k·std`: an upper estimate, reacts before the threshold is hit.
    #[default]
    Plus,
    /// `mean - k·std`, the literal form.
    Minus,
}

/// What the window statistics are taken over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticBase {
    /// Statistics of the penalty magnitudes.
    #[default]
    Magnitude,
    /// `|mean(x)| ± k·std(x)` over the signed state variable behind the
    /// penalty (e.g. a tilt angle), when the environment exposes one.
    SignedState,
}

/// Thresholds, tolerances and estimator settings for every constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub tau: Vec<f64>,
    pub delta: Vec<f64>,
    pub k_sigma: f64,
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(default)]
    pub sign: EstimatorSign,
    #[serde(default)]
    pub base: StatisticBase,
}

impl ConstraintSpec {
    /// Spec with `delta = 0`, `k_sigma = 3` and generated names.
    pub fn with_thresholds(tau: Vec<f64>) -> Self {
        let names = (0..tau.len()).map(|i| format!("c{i}")).collect();
        Self {
            delta: alloc::vec![0.0; tau.len()],
            tau,
            k_sigma: 3.0,
            names,
            sign: EstimatorSign::Plus,
            base: StatisticBase::Magnitude,
        }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Switching margin `tau - delta` of constraint `i`.
    pub fn margin(&self, i: usize) -> f64 {
        self.tau[i] - self.delta[i]
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta.len() != self.tau.len() {
            return Err(config(format!(
                "delta has {} entries but tau has {}",
                self.delta.len(),
                self.tau.len()
            )));
        }
        if !self.names.is_empty() && self.names.len() != self.tau.len() {
            return Err(config(format!(
                "names has {} entries but tau has {}",
                self.names.len(),
                self.tau.len()
            )));
        }
        for (i, (&tau, &delta)) in self.tau.iter().zip(&self.delta).enumerate() {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(config(format!("tau[{i}] must be > 0, got {tau}")));
            }
            if !(delta >= 0.0 && delta < tau) {
                return Err(config(format!(
                    "delta[{i}] must lie in [0, tau[{i}]), got {delta}"
                )));
            }
        }
        if !(self.k_sigma >= 0.0 && self.k_sigma.is_finite()) {
            return Err(config(format!(
                "k_sigma must be >= 0, got {}",
                self.k_sigma
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn validate_names_offending_field() {
        let mut spec = ConstraintSpec::with_thresholds(vec![0.2, 0.0]);
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("tau[1]"), "{err}");

        spec.tau[1] = 0.2;
        spec.delta[0] = 0.2;
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("delta[0]"), "{err}");

        spec.delta[0] = 0.02;
        spec.validate().unwrap();
    }
}
