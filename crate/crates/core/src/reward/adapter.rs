use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::baselines::{cbf_transform, crpo_gains, fixed_gains, olaux_step, pdo_step, CbfKind};
use super::channel::ConstraintSpec;
use super::estimate::PenaltyEstimate;
use super::gains::{roger_gains, GainVector};
use crate::error::{check_arity, config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    PrimaryOnly,
    FixedPenalty,
    QuadCbf,
    LogCbf,
    Pdo,
    Crpo,
    OlAux,
    Roger,
}

/// Flat, serializable adapter settings as they appear in a config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub kind: AdapterKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_gains: Option<Vec<f64>>,
    /// Initial multipliers for PDO / OL-AUX (zeros when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_init: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_lambda: Option<f64>,
}

impl AdapterConfig {
    pub fn new(kind: AdapterKind) -> Self {
        Self {
            kind,
            fixed_gains: None,
            dual_init: None,
            eta_lambda: None,
        }
    }

    pub fn with_fixed_gains(mut self, gains: Vec<f64>) -> Self {
        self.fixed_gains = Some(gains);
        self
    }

    pub fn with_eta_lambda(mut self, eta: f64) -> Self {
        self.eta_lambda = Some(eta);
        self
    }
}

/// Runtime state of a gain adapter.
///
/// Gains are produced per within-episode timestep; schemes without
/// per-timestep behaviour repeat one vector.
#[derive(Debug, Clone, PartialEq)]
pub enum AdapterState {
    PrimaryOnly { constraints: usize },
    FixedPenalty { gains: Vec<f64> },
    Cbf { kind: CbfKind, gains: Vec<f64> },
    Pdo { dual: Vec<f64>, eta: f64 },
    Crpo,
    OlAux { dual: Vec<f64>, eta: f64 },
    Roger,
}

impl AdapterState {
    pub fn from_config(cfg: &AdapterConfig, constraints: usize) -> Result<Self> {
        let gains = |name: &str| -> Result<Vec<f64>> {
            let g = cfg
                .fixed_gains
                .clone()
                .ok_or_else(|| config(format!("adapter.fixed_gains is required for {name}")))?;
            if g.len() != constraints {
                return Err(config(format!(
                    "adapter.fixed_gains has {} entries, expected {constraints}",
                    g.len()
                )));
            }
            if g.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(config("adapter.fixed_gains must be finite and >= 0"));
            }
            Ok(g)
        };
        let dual = || -> Result<(Vec<f64>, f64)> {
            let eta = cfg
                .eta_lambda
                .ok_or_else(|| config("adapter.eta_lambda is required for dual updates"))?;
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(config(format!("adapter.eta_lambda must be > 0, got {eta}")));
            }
            let dual = cfg
                .dual_init
                .clone()
                .unwrap_or_else(|| vec![0.0; constraints]);
            if dual.len() != constraints || dual.iter().any(|v| !(*v >= 0.0)) {
                return Err(config(
                    "adapter.dual_init must hold one value >= 0 per constraint",
                ));
            }
            Ok((dual, eta))
        };
        Ok(match cfg.kind {
            AdapterKind::PrimaryOnly => Self::PrimaryOnly { constraints },
            AdapterKind::FixedPenalty => Self::FixedPenalty {
                gains: gains("fixed_penalty")?,
            },
            AdapterKind::QuadCbf => Self::Cbf {
                kind: CbfKind::Quadratic,
                gains: gains("quad_cbf")?,
            },
            AdapterKind::LogCbf => Self::Cbf {
                kind: CbfKind::Logarithmic,
                gains: gains("log_cbf")?,
            },
            AdapterKind::Pdo => {
                let (dual, eta) = dual()?;
                Self::Pdo { dual, eta }
            }
            AdapterKind::Crpo => Self::Crpo,
            AdapterKind::OlAux => {
                let (dual, eta) = dual()?;
                Self::OlAux { dual, eta }
            }
            AdapterKind::Roger => Self::Roger,
        })
    }

    pub fn kind(&self) -> AdapterKind {
        match self {
            Self::PrimaryOnly { .. } => AdapterKind::PrimaryOnly,
            Self::FixedPenalty { .. } => AdapterKind::FixedPenalty,
            Self::Cbf {
                kind: CbfKind::Quadratic,
                ..
            } => AdapterKind::QuadCbf,
            Self::Cbf {
                kind: CbfKind::Logarithmic,
                ..
            } => AdapterKind::LogCbf,
            Self::Pdo { .. } => AdapterKind::Pdo,
            Self::Crpo => AdapterKind::Crpo,
            Self::OlAux { .. } => AdapterKind::OlAux,
            Self::Roger => AdapterKind::Roger,
        }
    }

    /// Whether [`Self::window_gains`] reads the penalty estimates.
    pub fn uses_estimates(&self) -> bool {
        matches!(self, Self::Pdo { .. } | Self::Crpo | Self::Roger)
    }

    /// Persistent multipliers of PDO / OL-AUX.
    pub fn dual(&self) -> Option<&[f64]> {
        match self {
            Self::Pdo { dual, .. } | Self::OlAux { dual, .. } => Some(dual),
            _ => None,
        }
    }

    /// Penalty value the learner sees for constraint `i`: the barrier
    /// transform for CBF adapters, the raw magnitude otherwise.
    pub fn effective_penalty(&self, i: usize, raw: f64, spec: &ConstraintSpec) -> Result<f64> {
        match self {
            Self::Cbf { kind, .. } => cbf_transform(raw, spec.tau[i], spec.delta[i], *kind),
            _ => Ok(raw),
        }
    }

    /// Gains for every within-episode timestep of the current window.
    ///
    /// `per_timestep[t]` is the estimate for timestep `t`; `pooled` is the
    /// window-wide estimate. PDO advances its multipliers once per call using
    /// the pooled estimate.
    pub fn window_gains(
        &mut self,
        per_timestep: &[PenaltyEstimate],
        pooled: &PenaltyEstimate,
        spec: &ConstraintSpec,
    ) -> Result<Vec<GainVector>> {
        let steps = per_timestep.len();
        let repeat = |g: GainVector| vec![g; steps];
        Ok(match self {
            Self::PrimaryOnly { constraints } => repeat(GainVector::primary_only(*constraints)),
            Self::FixedPenalty { gains } | Self::Cbf { gains, .. } => repeat(fixed_gains(gains)),
            Self::Pdo { dual, eta } => {
                *dual = pdo_step(dual, *eta, pooled, spec)?;
                repeat(GainVector::fixed(1.0, dual.clone()))
            }
            Self::OlAux { dual, .. } => repeat(GainVector::fixed(1.0, dual.clone())),
            Self::Crpo => per_timestep
                .iter()
                .map(|e| crpo_gains(e, spec))
                .collect::<Result<_>>()?,
            Self::Roger => per_timestep
                .iter()
                .map(|e| roger_gains(e, spec))
                .collect::<Result<_>>()?,
        })
    }

    /// Feeds the learner's per-channel update directions (primary first) to
    /// gradient-driven adapters.
    pub fn observe_directions(&mut self, directions: &[Vec<f64>]) -> Result<()> {
        if let Self::OlAux { dual, eta } = self {
            check_arity(dual.len() + 1, directions.len())?;
            *dual = olaux_step(dual, *eta, &directions[0], &directions[1..])?;
        }
        Ok(())
    }
}
