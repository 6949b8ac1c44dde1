//! Reward channels and gain adaptation.
//!
//! A [`ChannelSample`] keeps the primary reward and each constraint penalty
//! apart; an adapter turns windows of samples into a [`GainVector`] and the
//! gains fold the channels back into one scalar reward or advantage.

mod adapter;
mod baselines;
mod channel;
mod estimate;
mod gains;

pub use adapter::{AdapterConfig, AdapterKind, AdapterState};
pub use baselines::{cbf_transform, crpo_gains, fixed_gains, olaux_step, pdo_step, CbfKind};
pub use channel::{ChannelSample, ConstraintSpec, EstimatorSign, StatisticBase};
pub(crate) use estimate::mean_std as estimate_mean_std;
pub use estimate::{estimate_penalties, penalty_statistic, PenaltyEstimate};
pub use gains::{combine_advantages, combine_reward, roger_gains, GainVector};
