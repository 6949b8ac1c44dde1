//! Two-dimensional reward landscape with a thresholded hazard band next to
//! the reward peak. One step per episode: the explored parameters are the
//! point that gets evaluated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvObservation, Task};
use crate::error::{config, Result};
use crate::reward::ChannelSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LandscapeConfig {
    pub reward_center: [f64; 2],
    pub reward_width: f64,
    pub hazard_onset: f64,
    pub hazard_scale: f64,
    pub tau: f64,
    /// Initial mean parameters of the policy.
    pub start: [f64; 2],
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            reward_center: [0.8, 0.5],
            reward_width: 0.08,
            hazard_onset: 0.6,
            hazard_scale: 0.4,
            tau: 0.75,
            start: [0.2, 0.5],
        }
    }
}

impl LandscapeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hazard_onset > 0.0 && self.hazard_onset < 1.0) {
            return Err(config(format!(
                "env.hazard_onset must lie in (0, 1), got {}",
                self.hazard_onset
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(config(format!(
                "env.tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if !(self.reward_width > 0.0) {
            return Err(config("env.reward_width must be > 0"));
        }
        if !(self.hazard_scale > 0.0) {
            return Err(config("env.hazard_scale must be > 0"));
        }
        Ok(())
    }
}

/// Evaluates the landscape at `point` (clamped to the unit square).
///
/// `R₀ = exp(−‖p − c‖²/w)`, `h = max(0, p₁ − onset)/scale`.
pub fn landscape_step(point: [f64; 2], cfg: &LandscapeConfig) -> EnvObservation {
    let p = point.map(|v| v.clamp(0.0, 1.0));
    let (dx, dy) = (p[0] - cfg.reward_center[0], p[1] - cfg.reward_center[1]);
    let d2 = dx * dx + dy * dy;
    let primary = libm::exp(-d2 / cfg.reward_width);
    let hazard = (p[0] - cfg.hazard_onset).max(0.0) / cfg.hazard_scale;
    EnvObservation::new(
        p.to_vec(),
        ChannelSample::new(primary, vec![hazard], 0),
        vec![hazard],
        &[cfg.tau],
        true,
    )
}

#[derive(Debug, Clone)]
pub struct LandscapeTask {
    cfg: LandscapeConfig,
}

impl LandscapeTask {
    pub fn new(cfg: LandscapeConfig) -> Self {
        Self { cfg }
    }
}

impl Task for LandscapeTask {
    fn param_dim(&self) -> usize {
        2
    }
    fn constraint_count(&self) -> usize {
        1
    }
    fn max_steps(&self) -> usize {
        1
    }
    fn tau(&self) -> Vec<f64> {
        vec![self.cfg.tau]
    }
    fn state_labels(&self) -> &'static [&'static str] {
        &["p1", "p2"]
    }
    fn initial_params(&self) -> Vec<f64> {
        self.cfg.start.to_vec()
    }
    fn reset(&mut self, _rng: &mut ChaCha8Rng) -> EnvObservation {
        EnvObservation::new(
            vec![0.0, 0.0],
            ChannelSample::new(0.0, vec![0.0], 0),
            vec![0.0],
            &[self.cfg.tau],
            false,
        )
    }
    fn step(
        &mut self,
        _t: usize,
        params: &[f64],
        action_grads: &mut [f64],
    ) -> Result<EnvObservation> {
        action_grads.fill(1.0);
        Ok(landscape_step([params[0], params[1]], &self.cfg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_is_safe() {
        let cfg = LandscapeConfig::default();
        let obs = landscape_step(cfg.reward_center, &cfg);
        let expected_h = (0.8 - 0.6) / 0.4;
        assert_eq!(obs.channels.primary, 1.0);
        assert!((obs.channels.penalties[0] - expected_h).abs() < 1e-15);
        assert_eq!(obs.violated, vec![false]);
    }

    #[test]
    fn below_onset_and_boundary() {
        let cfg = LandscapeConfig::default();
        assert_eq!(landscape_step([0.0, 0.0], &cfg).channels.penalties[0], 0.0);
        // 0.9 is not exactly representable; the strict comparison still holds
        // at the threshold value itself.
        let at = landscape_step([0.9, 0.5], &cfg);
        assert!((at.channels.penalties[0] - 0.75).abs() < 1e-12);
        let tau_point = cfg.hazard_onset + cfg.tau * cfg.hazard_scale;
        let obs = landscape_step([tau_point, 0.5], &cfg);
        assert_eq!(obs.violated[0], obs.channels.penalties[0] > cfg.tau);
        assert!(landscape_step([0.95, 0.5], &cfg).violated[0]);
    }

    #[test]
    fn ranges_and_conflict() {
        let cfg = LandscapeConfig::default();
        for i in 0..=40 {
            for j in 0..=40 {
                let p = [i as f64 / 40.0, j as f64 / 40.0];
                let obs = landscape_step(p, &cfg);
                let (r, h) = (obs.channels.primary, obs.channels.penalties[0]);
                assert!(r > 0.0 && r <= 1.0);
                assert!((0.0..=1.0).contains(&h));
                if p[0] < 0.8 && p[0] < cfg.hazard_onset + cfg.tau * cfg.hazard_scale {
                    let eps = 1e-6;
                    let up = landscape_step([p[0] + eps, p[1]], &cfg).channels.primary;
                    assert!(up > r, "no ascent toward the hazard at {p:?}");
                }
            }
        }
    }

    #[test]
    fn clamps_to_unit_square() {
        let cfg = LandscapeConfig::default();
        let obs = landscape_step([1.7, -0.2], &cfg);
        assert_eq!(obs.state, vec![1.0, 0.0]);
        assert_eq!(obs.channels.penalties[0], 1.0);
    }

    #[test]
    fn reset_is_blank() {
        let mut task = LandscapeTask::new(LandscapeConfig::default());
        let obs = task.reset(&mut crate::rng::episode_rng(
            0,
            0,
            crate::rng::Purpose::Reset,
        ));
        assert!(!obs.done);
        assert_eq!(
            (obs.channels.primary, obs.channels.penalties[0]),
            (0.0, 0.0)
        );
    }
}
