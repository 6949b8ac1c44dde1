//! Parameter-space Gaussian exploration and the AGOL update rule.

mod agol;
mod buffer;
mod config;
mod policy;
mod returns;

pub use agol::{agol_update, AgolStep};
pub use buffer::{Episode, TrajectoryBuffer};
pub use config::LearnerConfig;
pub use policy::PolicyState;
pub use returns::{channel_returns, ReturnStats, RETURN_STD_FLOOR};

/// Horizon returns `mean(values[t..t+horizon])` of one episode.
pub fn horizon_returns(values: &[f64], horizon: usize) -> alloc::vec::Vec<f64> {
    returns::horizon_means(values, horizon.max(1)).collect()
}
