//! Baseline weighting schemes: fixed penalties, barrier-function penalty
//! transforms, primal-dual multipliers, reward switching and gradient
//! alignment.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::channel::ConstraintSpec;
use super::estimate::PenaltyEstimate;
use super::gains::GainVector;
use crate::error::{check_arity, config, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbfKind {
    Quadratic,
    Logarithmic,
}

/// `λ₀ = 1` with the tuned penalty gains passed through unnormalized.
pub fn fixed_gains(penalty_gains: &[f64]) -> GainVector {
    GainVector::fixed(1.0, penalty_gains.to_vec())
}

/// Barrier transform of a raw penalty `x̃ ≥ 0` with margin `m = τ − δ`.
///
/// Quadratic: `[x̃² − m²]₊`. Logarithmic: `ln(x̃/m)²` once `x̃ > m`, zero
/// inside the margin (so `ln 0` is never evaluated).
pub fn cbf_transform(x_tilde: f64, tau: f64, delta: f64, kind: CbfKind) -> Result<f64> {
    if !(tau > delta && delta >= 0.0) {
        return Err(config("barrier transform needs tau > delta >= 0"));
    }
    let margin = tau - delta;
    Ok(match kind {
        CbfKind::Quadratic => (x_tilde * x_tilde - margin * margin).max(0.0),
        CbfKind::Logarithmic if x_tilde > margin => {
            let l = libm::log(x_tilde / margin);
            l * l
        }
        CbfKind::Logarithmic => 0.0,
    })
}

/// One dual ascent step: `λᵢ' = [λᵢ + η(r̃ᵢ − (τᵢ − δᵢ))]₊`.
pub fn pdo_step(
    dual: &[f64],
    eta: f64,
    est: &PenaltyEstimate,
    spec: &ConstraintSpec,
) -> Result<Vec<f64>> {
    check_arity(spec.len(), dual.len())?;
    check_arity(spec.len(), est.r_tilde.len())?;
    Ok(dual
        .iter()
        .zip(&est.r_tilde)
        .enumerate()
        .map(|(i, (l, r))| (l + eta * (r - spec.margin(i))).max(0.0))
        .collect())
}

/// Reward switching: penalty-only updates while any estimate exceeds its
/// margin. Only the constraint with the largest `r̃/τ` is rectified, the
/// lowest index winning ties.
pub fn crpo_gains(est: &PenaltyEstimate, spec: &ConstraintSpec) -> Result<GainVector> {
    let n = spec.len();
    check_arity(n, est.r_tilde.len())?;
    let mut worst: Option<(usize, f64)> = None;
    for (i, r) in est.r_tilde.iter().enumerate() {
        if *r > spec.margin(i) {
            let ratio = r / spec.tau[i];
            if worst.is_none_or(|(_, w)| ratio > w) {
                worst = Some((i, ratio));
            }
        }
    }
    Ok(match worst {
        None => GainVector::primary_only(n),
        Some((k, _)) => {
            let mut lambda = alloc::vec![0.0; n];
            lambda[k] = 1.0;
            GainVector::fixed(0.0, lambda)
        }
    })
}

/// Gradient-alignment step: `λᵢ' = [λᵢ + η·⟨∇R₀, ∇Rᵢ⟩]₊`.
pub fn olaux_step(
    dual: &[f64],
    eta: f64,
    grad_primary: &[f64],
    grad_penalty: &[Vec<f64>],
) -> Result<Vec<f64>> {
    check_arity(dual.len(), grad_penalty.len())?;
    dual.iter()
        .zip(grad_penalty)
        .map(|(l, g)| {
            if g.len() != grad_primary.len() {
                return Err(Error::DimensionMismatch {
                    expected: grad_primary.len(),
                    found: g.len(),
                });
            }
            let dot: f64 = grad_primary.iter().zip(g).map(|(a, b)| a * b).sum();
            Ok((l + eta * dot).max(0.0))
        })
        .collect()
}
