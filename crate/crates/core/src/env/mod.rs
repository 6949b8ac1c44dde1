//! Constrained benchmark environments.
//!
//! A [`Task`] pairs an environment with the way explored parameters become
//! actions, and reports `|∂a/∂θ|` for the learner.

mod cart;
mod landscape;

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cart::{cart_reset, cart_step, CartState, CartTiltConfig, CartTiltTask};
pub use landscape::{landscape_step, LandscapeConfig, LandscapeTask};

use crate::error::Result;
use crate::reward::ChannelSample;

/// What an environment reports after a reset or a step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvObservation {
    pub state: Vec<f64>,
    pub channels: ChannelSample,
    /// Signed state value behind each penalty.
    pub signed: Vec<f64>,
    /// `violated[i] ⇔ penalties[i] > tau[i]`.
    pub violated: Vec<bool>,
    pub done: bool,
}

impl EnvObservation {
    pub(crate) fn new(
        state: Vec<f64>,
        channels: ChannelSample,
        signed: Vec<f64>,
        tau: &[f64],
        done: bool,
    ) -> Self {
        let violated = channels
            .penalties
            .iter()
            .zip(tau)
            .map(|(p, t)| p > t)
            .collect();
        Self {
            state,
            channels,
            signed,
            violated,
            done,
        }
    }
}

pub trait Task {
    fn param_dim(&self) -> usize;
    fn constraint_count(&self) -> usize;
    /// Maximum steps per episode.
    fn max_steps(&self) -> usize;
    /// Constraint thresholds.
    fn tau(&self) -> Vec<f64>;
    fn state_labels(&self) -> &'static [&'static str];
    fn initial_params(&self) -> Vec<f64>;
    /// Penalty level of constraint 0 that counts as a fall, if any.
    fn fall_threshold(&self) -> Option<f64> {
        None
    }
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> EnvObservation;
    /// Advances one step with explored parameters `params`, writing
    /// `|∂a/∂θₖ|` into `action_grads`.
    fn step(
        &mut self,
        t: usize,
        params: &[f64],
        action_grads: &mut [f64],
    ) -> Result<EnvObservation>;
}

/// Serializable environment selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConfig {
    Landscape(LandscapeConfig),
    CartTilt(CartTiltConfig),
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Landscape(c) => c.validate(),
            Self::CartTilt(c) => c.validate(),
        }
    }

    pub fn tau(&self) -> Vec<f64> {
        match self {
            Self::Landscape(c) => alloc::vec![c.tau],
            Self::CartTilt(c) => alloc::vec![c.tau_tilt],
        }
    }

    pub fn build(&self) -> EnvTask {
        match self {
            Self::Landscape(c) => EnvTask::Landscape(LandscapeTask::new(c.clone())),
            Self::CartTilt(c) => EnvTask::CartTilt(CartTiltTask::new(c.clone())),
        }
    }
}

/// Any of the bundled tasks.
#[derive(Debug, Clone)]
pub enum EnvTask {
    Landscape(LandscapeTask),
    CartTilt(CartTiltTask),
}

macro_rules! dispatch {
    ($self:ident, $t:ident => $e:expr) => {
        match $self {
            EnvTask::Landscape($t) => $e,
            EnvTask::CartTilt($t) => $e,
        }
    };
}

impl Task for EnvTask {
    fn param_dim(&self) -> usize {
        dispatch!(self, t => t.param_dim())
    }
    fn constraint_count(&self) -> usize {
        dispatch!(self, t => t.constraint_count())
    }
    fn max_steps(&self) -> usize {
        dispatch!(self, t => t.max_steps())
    }
    fn tau(&self) -> Vec<f64> {
        dispatch!(self, t => t.tau())
    }
    fn state_labels(&self) -> &'static [&'static str] {
        dispatch!(self, t => t.state_labels())
    }
    fn initial_params(&self) -> Vec<f64> {
        dispatch!(self, t => t.initial_params())
    }
    fn fall_threshold(&self) -> Option<f64> {
        dispatch!(self, t => t.fall_threshold())
    }
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> EnvObservation {
        dispatch!(self, t => t.reset(rng))
    }
    fn step(
        &mut self,
        step: usize,
        params: &[f64],
        action_grads: &mut [f64],
    ) -> Result<EnvObservation> {
        dispatch!(self, t => t.step(step, params, action_grads))
    }
}
