//! In-memory trial log.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One timestep of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub episode: usize,
    pub t: usize,
    pub state: Vec<f64>,
    pub primary: f64,
    /// Raw penalty magnitudes (before any barrier transform).
    pub penalties: Vec<f64>,
    pub lambda0: f64,
    pub lambda: Vec<f64>,
    pub delta: f64,
    /// Penalty estimate the gains were computed from (zero when unused).
    pub r_tilde: Vec<f64>,
    /// Gain-weighted horizon return of this sample.
    pub g_combined: f64,
}

/// Everything recorded during one trial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialLog {
    pub seed: u64,
    pub config_hash: String,
    pub state_labels: Vec<String>,
    pub constraint_names: Vec<String>,
    pub tau: Vec<f64>,
    pub episodes_per_window: usize,
    pub rows: Vec<LogRow>,
    /// Episodes cut short by non-finite dynamics.
    pub failed_episodes: Vec<usize>,
    /// Mean parameters after each episode.
    pub params: Vec<Vec<f64>>,
}

impl TrialLog {
    pub fn constraint_count(&self) -> usize {
        self.tau.len()
    }

    /// Number of episodes with at least one row.
    pub fn episode_count(&self) -> usize {
        self.rows.last().map_or(0, |r| r.episode + 1)
    }

    /// Rows grouped per episode, in order. Episodes without rows are skipped.
    pub fn episodes(&self) -> impl Iterator<Item = &[LogRow]> {
        self.rows.chunk_by(|a, b| a.episode == b.episode)
    }

    /// Whether any penalty of `row` exceeds its threshold.
    pub fn is_violation(&self, row: &LogRow) -> bool {
        row.penalties.iter().zip(&self.tau).any(|(p, tau)| p > tau)
    }

    /// Fraction of rows with a violated constraint.
    pub fn violation_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let hits = self.rows.iter().filter(|r| self.is_violation(r)).count();
        hits as f64 / self.rows.len() as f64
    }

    /// Mean primary reward over the last `window` episodes.
    pub fn final_window_primary(&self, window: usize) -> Option<f64> {
        let episodes: Vec<&[LogRow]> = self.episodes().collect();
        let tail = &episodes[episodes.len().saturating_sub(window)..];
        let (sum, n) = tail
            .iter()
            .flat_map(|e| e.iter())
            .fold((0.0, 0usize), |(s, n), r| (s + r.primary, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}
