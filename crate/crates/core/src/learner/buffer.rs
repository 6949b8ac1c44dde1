use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::policy::PolicyState;
use crate::reward::ChannelSample;

/// One stored episode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Episode {
    /// Channel values as the learner sees them (after any penalty transform).
    pub samples: Vec<ChannelSample>,
    /// Signed state value behind each penalty, per timestep.
    pub signed: Vec<Vec<f64>>,
    /// `|∂a/∂θₖ|` per timestep and parameter.
    pub action_grads: Vec<Vec<f64>>,
    pub explored: Vec<f64>,
    /// Mean and scales `explored` was drawn with; empty means "use the
    /// policy being updated".
    pub origin_theta: Vec<f64>,
    pub origin_sigma: Vec<f64>,
}

impl Episode {
    pub fn new(explored: Vec<f64>) -> Self {
        Self {
            explored,
            ..Self::default()
        }
    }

    /// Starts an episode from the policy's current exploration sample,
    /// remembering the distribution it came from.
    pub fn explored_from(policy: &PolicyState) -> Self {
        Self {
            explored: policy.theta_explored.clone(),
            origin_theta: policy.theta.clone(),
            origin_sigma: policy.sigma_theta.clone(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, sample: ChannelSample, signed: Vec<f64>, action_grads: Vec<f64>) {
        self.samples.push(sample);
        self.signed.push(signed);
        self.action_grads.push(action_grads);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ring of the most recent episodes; the oldest is evicted first.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBuffer {
    capacity: usize,
    episodes: VecDeque<Episode>,
}

impl TrajectoryBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        Self {
            capacity,
            episodes: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, episode: Episode) {
        if self.episodes.len() == self.capacity {
            self.episodes.pop_front();
        }
        self.episodes.push_back(episode);
    }

    pub fn is_full(&self) -> bool {
        self.episodes.len() == self.capacity
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn episodes(&self) -> impl ExactSizeIterator<Item = &Episode> + Clone {
        self.episodes.iter()
    }

    /// Total number of stored samples.
    pub fn sample_count(&self) -> usize {
        self.episodes.iter().map(Episode::len).sum()
    }

    /// Longest stored episode.
    pub fn max_len(&self) -> usize {
        self.episodes.iter().map(Episode::len).max().unwrap_or(0)
    }

    /// All stored samples, oldest episode first.
    pub fn samples(&self) -> impl Iterator<Item = &ChannelSample> {
        self.episodes.iter().flat_map(|e| e.samples.iter())
    }
}
