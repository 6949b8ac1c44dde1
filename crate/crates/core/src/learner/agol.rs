use alloc::vec;
use alloc::vec::Vec;

use super::buffer::TrajectoryBuffer;
use super::config::LearnerConfig;
use super::policy::PolicyState;
use super::returns::channel_returns;
use crate::error::{Error, Result};
use crate::reward::{combine_advantages, GainVector};

/// Result of one AGOL update.
#[derive(Debug, Clone, PartialEq)]
pub struct AgolStep {
    pub policy: PolicyState,
    /// Per-channel parameter directions (primary first), each computed with
    /// that channel's normalized advantage alone and scaled by `eta_theta`.
    pub directions: Vec<Vec<f64>>,
    /// Mean combined advantage over the window.
    pub mean_advantage: f64,
}

/// Accumulates the unscaled sums of the parameter and exploration updates.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Accumulator {
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Accumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
            sigma: vec![0.0; dim],
        }
    }

    /// Adds `|∇a|·(θ̃−θ)/σ²·Â` and `|∇a|·((θ̃−θ)² − σ²)/σ³·Â`.
    pub fn add(
        &mut self,
        theta: &[f64],
        sigma: &[f64],
        explored: &[f64],
        grads: &[f64],
        advantage: f64,
    ) {
        for k in 0..self.theta.len() {
            let s = sigma[k];
            let d = explored[k] - theta[k];
            let w = grads[k] * advantage;
            self.theta[k] += w * d / (s * s);
            self.sigma[k] += w * (d * d - s * s) / (s * s * s);
        }
    }
}

/// One AGOL step over the stored window.
///
/// Per-channel returns are normalized over the whole buffer and combined with
/// the gains of each sample's timestep (`gains[t]`, the last entry covering
/// any later timestep), then divided by the gain mass `λ₀ + Σλᵢ` so that the
/// step size does not grow with the penalty gains. ROGER gains have unit mass.
/// Each sample is scored against the mean and scales it was explored with
/// when the episode records them. `sigma_theta` is floored at
/// `cfg.sigma_floor()`.
pub fn agol_update(
    policy: &PolicyState,
    buffer: &TrajectoryBuffer,
    gains: &[GainVector],
    cfg: &LearnerConfig,
) -> Result<AgolStep> {
    let last = gains.last().ok_or(Error::EmptyWindow)?;
    let stats = channel_returns(buffer, cfg.return_horizon)?;
    let dim = policy.dim();

    let mut total = Accumulator::new(dim);
    let mut per_channel: Vec<Accumulator> =
        (0..stats.len()).map(|_| Accumulator::new(dim)).collect();
    let mut advantages = vec![0.0; stats.len()];
    let mut adv_sum = 0.0;
    let mut i = 0;
    for episode in buffer.episodes() {
        if episode.explored.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: episode.explored.len(),
            });
        }
        let (theta, sigma) = if episode.origin_theta.is_empty() {
            (&policy.theta, &policy.sigma_theta)
        } else {
            (&episode.origin_theta, &episode.origin_sigma)
        };
        if theta.len() != dim || sigma.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: theta.len().min(sigma.len()),
            });
        }
        for (t, grads) in episode.action_grads.iter().enumerate() {
            for (a, s) in advantages.iter_mut().zip(&stats) {
                *a = s.advantage(i);
            }
            let g = gains.get(t).unwrap_or(last);
            let mass = g.lambda0 + g.lambda.iter().sum::<f64>();
            let combined =
                combine_advantages(&advantages, g)? / if mass > 0.0 { mass } else { 1.0 };
            if !combined.is_finite() {
                return Err(Error::NonFinite("advantage"));
            }
            adv_sum += combined;
            total.add(theta, sigma, &episode.explored, grads, combined);
            for (acc, a) in per_channel.iter_mut().zip(&advantages) {
                acc.add(theta, sigma, &episode.explored, grads, *a);
            }
            i += 1;
        }
    }

    let floor = cfg.sigma_floor();
    let mut next = policy.clone();
    for k in 0..dim {
        next.theta[k] += cfg.eta_theta * total.theta[k];
        next.sigma_theta[k] = (next.sigma_theta[k] + cfg.eta_sigma * total.sigma[k]).max(floor);
    }
    if next
        .theta
        .iter()
        .chain(&next.sigma_theta)
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("policy parameters"));
    }

    let directions = per_channel
        .into_iter()
        .map(|acc| acc.theta.into_iter().map(|v| cfg.eta_theta * v).collect())
        .collect();
    Ok(AgolStep {
        policy: next,
        directions,
        mean_advantage: if i > 0 { adv_sum / i as f64 } else { 0.0 },
    })
}
