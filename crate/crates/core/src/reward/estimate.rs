use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::channel::{ChannelSample, ConstraintSpec, EstimatorSign, StatisticBase};
use crate::error::{check_arity, Error, Result};

/// Confidence-adjusted penalty estimate `R̃` for every constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyEstimate {
    pub r_tilde: Vec<f64>,
    pub window_len: usize,
    pub per_timestep: bool,
}

impl PenaltyEstimate {
    /// Estimate with the given values, as if from a one-sample window.
    pub fn from_values(r_tilde: Vec<f64>) -> Self {
        Self {
            r_tilde,
            window_len: 1,
            per_timestep: false,
        }
    }
}

/// Mean and population standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// `max(0, centre ± k·std)` over one constraint's window values.
///
/// For [`StatisticBase::Magnitude`] the values are penalty magnitudes and the
/// centre is their mean; for [`StatisticBase::SignedState`] they are signed
/// state values and the centre is `|mean|`.
pub fn penalty_statistic(
    values: &[f64],
    k_sigma: f64,
    sign: EstimatorSign,
    base: StatisticBase,
) -> f64 {
    let (mean, std) = mean_std(values);
    let centre = match base {
        StatisticBase::Magnitude => mean,
        StatisticBase::SignedState => libm::fabs(mean),
    };
    let r = match sign {
        EstimatorSign::Plus => centre + k_sigma * std,
        EstimatorSign::Minus => centre - k_sigma * std,
    };
    r.max(0.0)
}

/// Windowed penalty estimate over stored samples.
///
/// With `per_timestep_index = Some(t)` only samples recorded at within-episode
/// timestep `t` are used, giving one estimate per timestep across the stored
/// episodes.
pub fn estimate_penalties(
    window: &[ChannelSample],
    spec: &ConstraintSpec,
    per_timestep_index: Option<usize>,
) -> Result<PenaltyEstimate> {
    let n = spec.len();
    let selected: Vec<&ChannelSample> = window
        .iter()
        .filter(|s| per_timestep_index.is_none_or(|t| s.t == t))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyWindow);
    }
    for s in &selected {
        check_arity(n, s.penalties.len())?;
    }

    let mut column = Vec::with_capacity(selected.len());
    let r_tilde = (0..n)
        .map(|i| {
            column.clear();
            column.extend(selected.iter().map(|s| s.penalties[i]));
            penalty_statistic(&column, spec.k_sigma, spec.sign, StatisticBase::Magnitude)
        })
        .collect();

    Ok(PenaltyEstimate {
        r_tilde,
        window_len: selected.len(),
        per_timestep: per_timestep_index.is_some(),
    })
}
