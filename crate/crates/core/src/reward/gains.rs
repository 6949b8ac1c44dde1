use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::channel::{ChannelSample, ConstraintSpec};
use super::estimate::PenaltyEstimate;
use crate::error::{check_arity, Result};

/// Weights of the primary reward and of each penalty.
///
/// `delta_t` and `ratios` are only meaningful for ROGER gains; the baselines
/// leave them at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainVector {
    pub lambda0: f64,
    pub lambda: Vec<f64>,
    pub delta_t: f64,
    pub ratios: Vec<f64>,
}

impl GainVector {
    /// `(1, 0, ..., 0)`: the primary reward alone.
    pub fn primary_only(constraints: usize) -> Self {
        Self::fixed(1.0, vec![0.0; constraints])
    }

    pub(crate) fn fixed(lambda0: f64, lambda: Vec<f64>) -> Self {
        let n = lambda.len();
        Self {
            lambda0,
            lambda,
            delta_t: 0.0,
            ratios: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// ROGER gains from the penalty estimates.
///
/// `S = Σ (r̃ⱼ/τⱼ)²`, `Δ = min(S, 1)`, `λ₀ = 1 − Δ`, `λᵢ = Δ·(r̃ᵢ/τᵢ)²/S`.
/// When `S ≤ 1` this is `λᵢ = (r̃ᵢ/τᵢ)²`, which is evaluated directly so the
/// gain of one constraint does not depend on the others in that regime.
pub fn roger_gains(est: &PenaltyEstimate, spec: &ConstraintSpec) -> Result<GainVector> {
    let n = spec.len();
    check_arity(n, est.r_tilde.len())?;

    let pressure: Vec<f64> = est
        .r_tilde
        .iter()
        .zip(&spec.tau)
        .map(|(r, tau)| {
            let u = r / tau;
            u * u
        })
        .collect();
    let total: f64 = pressure.iter().sum();
    let delta_t = total.min(1.0);

    let ratios: Vec<f64> = if total > 0.0 {
        pressure.iter().map(|p| p / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let lambda = if total <= 1.0 {
        pressure
    } else {
        ratios.iter().map(|r| r * delta_t).collect()
    };

    Ok(GainVector {
        lambda0: 1.0 - delta_t,
        lambda,
        delta_t,
        ratios,
    })
}

/// `λ₀·R₀ − Σ λᵢ·Rᵢ`.
pub fn combine_reward(sample: &ChannelSample, gains: &GainVector) -> Result<f64> {
    check_arity(gains.len(), sample.penalties.len())?;
    Ok(weighted(sample.primary, &sample.penalties, gains))
}

/// Combines per-channel advantages (primary first) into one score.
pub fn combine_advantages(advantages: &[f64], gains: &GainVector) -> Result<f64> {
    check_arity(gains.len() + 1, advantages.len())?;
    Ok(weighted(advantages[0], &advantages[1..], gains))
}

fn weighted(primary: f64, penalties: &[f64], gains: &GainVector) -> f64 {
    penalties
        .iter()
        .zip(&gains.lambda)
        .fold(gains.lambda0 * primary, |acc, (p, l)| acc - l * p)
}
