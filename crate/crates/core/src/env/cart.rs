//! Cart with a pole hanging below it. Driving the cart forward earns velocity
//! reward but swings the pole; the tilt magnitude is the constraint penalty.
//!
//! The policy is open loop: the drive force is a weighted sum of triangular
//! basis functions over the episode, so `|∂F/∂θₖ|` is the activation of
//! basis `k` at that step.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvObservation, Task};
use crate::error::{config, Error, Result};
use crate::reward::ChannelSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CartTiltConfig {
    pub m_cart: f64,
    pub m_pole: f64,
    /// Pole half-length (m).
    pub half_length: f64,
    pub gravity: f64,
    pub dt: f64,
    /// Integrator substeps per control step.
    pub substeps: usize,
    pub force_limit: f64,
    /// Viscous friction on the cart (N·s/m).
    pub friction: f64,
    pub tau_tilt: f64,
    pub episode_len: usize,
    /// Tilt treated as a fall; ends the episode.
    pub fall_angle: f64,
    /// Half-width of the uniform tilt jitter at reset.
    pub reset_jitter: f64,
    pub basis_count: usize,
}

impl Default for CartTiltConfig {
    fn default() -> Self {
        Self {
            m_cart: 1.0,
            m_pole: 0.3,
            half_length: 0.5,
            gravity: 9.81,
            dt: 0.02,
            substeps: 10,
            force_limit: 10.0,
            friction: 0.1,
            tau_tilt: 0.2,
            episode_len: 70,
            fall_angle: core::f64::consts::FRAC_PI_4,
            reset_jitter: 0.01,
            basis_count: 8,
        }
    }
}

impl CartTiltConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("env.m_cart", self.m_cart),
            ("env.m_pole", self.m_pole),
            ("env.half_length", self.half_length),
            ("env.dt", self.dt),
            ("env.force_limit", self.force_limit),
            ("env.tau_tilt", self.tau_tilt),
            ("env.fall_angle", self.fall_angle),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.friction < 0.0 || self.reset_jitter < 0.0 {
            return Err(config("env.friction and env.reset_jitter must be >= 0"));
        }
        if self.substeps == 0 || self.episode_len == 0 || self.basis_count < 2 {
            return Err(config(
                "env.substeps, env.episode_len must be >= 1 and env.basis_count >= 2",
            ));
        }
        Ok(())
    }
}

/// `(x, ẋ, φ, φ̇)`, with `φ` measured from the downward vertical.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartState {
    pub x: f64,
    pub x_dot: f64,
    pub phi: f64,
    pub phi_dot: f64,
}

impl CartState {
    fn as_vec(&self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.phi, self.phi_dot]
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.x_dot.is_finite()
            && self.phi.is_finite()
            && self.phi_dot.is_finite()
    }
}

/// Cart and pole accelerations for drive force `force`.
fn accelerations(s: &CartState, force: f64, cfg: &CartTiltConfig) -> (f64, f64) {
    let total = cfg.m_cart + cfg.m_pole;
    let (sin, cos) = (libm::sin(s.phi), libm::cos(s.phi));
    let ml = cfg.m_pole * cfg.half_length;
    let temp = (force - cfg.friction * s.x_dot + ml * s.phi_dot * s.phi_dot * sin) / total;
    let phi_acc = (-cfg.gravity * sin - cos * temp)
        / (cfg.half_length * (4.0 / 3.0 - cfg.m_pole * cos * cos / total));
    let x_acc = temp - ml * phi_acc * cos / total;
    (x_acc, phi_acc)
}

fn observe(s: &CartState, cfg: &CartTiltConfig) -> EnvObservation {
    let tilt = libm::fabs(s.phi);
    EnvObservation::new(
        s.as_vec(),
        ChannelSample::new(s.x_dot, vec![tilt], 0),
        vec![s.phi],
        &[cfg.tau_tilt],
        tilt > cfg.fall_angle,
    )
}

/// One control step (semi-implicit Euler over `cfg.substeps` substeps).
/// `done` is set on a fall; the episode length is tracked by the task.
pub fn cart_step(
    state: CartState,
    force: f64,
    cfg: &CartTiltConfig,
) -> Result<(CartState, EnvObservation)> {
    let force = force.clamp(-cfg.force_limit, cfg.force_limit);
    let h = cfg.dt / cfg.substeps as f64;
    let mut s = state;
    for _ in 0..cfg.substeps {
        let (x_acc, phi_acc) = accelerations(&s, force, cfg);
        s.x_dot += h * x_acc;
        s.phi_dot += h * phi_acc;
        s.x += h * s.x_dot;
        s.phi += h * s.phi_dot;
    }
    if !s.is_finite() {
        return Err(Error::Diverged);
    }
    Ok((s, observe(&s, cfg)))
}

/// Rest state with a small uniform tilt.
pub fn cart_reset(cfg: &CartTiltConfig, rng: &mut ChaCha8Rng) -> (CartState, EnvObservation) {
    let phi = if cfg.reset_jitter > 0.0 {
        rng.random_range(-cfg.reset_jitter..=cfg.reset_jitter)
    } else {
        0.0
    };
    let s = CartState {
        phi,
        ..CartState::default()
    };
    let mut obs = observe(&s, cfg);
    obs.done = false;
    (s, obs)
}

#[derive(Debug, Clone)]
pub struct CartTiltTask {
    cfg: CartTiltConfig,
    state: CartState,
}

impl CartTiltTask {
    pub fn new(cfg: CartTiltConfig) -> Self {
        Self {
            cfg,
            state: CartState::default(),
        }
    }

    /// Activation of each triangular basis at step `t`.
    pub fn basis(&self, t: usize, out: &mut [f64]) {
        let k = self.cfg.basis_count;
        let phase = if self.cfg.episode_len > 1 {
            t as f64 / (self.cfg.episode_len - 1) as f64
        } else {
            0.0
        };
        let width = 1.0 / (k - 1) as f64;
        for (j, b) in out.iter_mut().enumerate() {
            let centre = j as f64 * width;
            *b = (1.0 - libm::fabs(phase - centre) / width).max(0.0);
        }
    }
}

impl Task for CartTiltTask {
    fn param_dim(&self) -> usize {
        self.cfg.basis_count
    }
    fn constraint_count(&self) -> usize {
        1
    }
    fn max_steps(&self) -> usize {
        self.cfg.episode_len
    }
    fn tau(&self) -> Vec<f64> {
        vec![self.cfg.tau_tilt]
    }
    fn state_labels(&self) -> &'static [&'static str] {
        &["x", "x_dot", "phi", "phi_dot"]
    }
    fn initial_params(&self) -> Vec<f64> {
        vec![0.0; self.cfg.basis_count]
    }
    fn fall_threshold(&self) -> Option<f64> {
        Some(self.cfg.fall_angle)
    }
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> EnvObservation {
        let (s, obs) = cart_reset(&self.cfg, rng);
        self.state = s;
        obs
    }
    fn step(
        &mut self,
        t: usize,
        params: &[f64],
        action_grads: &mut [f64],
    ) -> Result<EnvObservation> {
        self.basis(t, action_grads);
        let force: f64 = params
            .iter()
            .zip(action_grads.iter())
            .map(|(p, b)| p * b)
            .sum();
        let (s, mut obs) = cart_step(self.state, force, &self.cfg)?;
        self.state = s;
        obs.channels.t = t;
        obs.done |= t + 1 >= self.cfg.episode_len;
        Ok(obs)
    }
}
