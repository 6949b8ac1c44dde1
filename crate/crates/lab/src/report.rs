//! Aggregation of finished trials into comparison and sweep reports.

use roger_core::analysis::{
    kde_tail_probability, mean, percentile, sample_std, two_proportion_test, welch_t_test,
};
use serde::{Deserialize, Serialize};

/// Groups with fewer completed trials than this have their tests marked
/// low-power.
pub const LOW_POWER_TRIALS: usize = 5;

/// Episodes averaged for the final primary reward of a trial.
pub const FINAL_EPISODES: usize = 8;

/// Compact result of one trial, small enough to keep for every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub seed: u64,
    pub config_hash: String,
    pub episodes: usize,
    pub steps: usize,
    pub final_primary: Option<f64>,
    pub violation_steps: usize,
    pub max_deviation: Vec<f64>,
    pub falls: usize,
    pub diverged_at: Option<usize>,
    /// Every raw penalty value, per constraint.
    #[serde(skip)]
    pub penalties: Vec<Vec<f64>>,
}

impl TrialStats {
    pub fn from_log(
        log: &roger_core::log::TrialLog,
        falls: usize,
        diverged_at: Option<usize>,
    ) -> Self {
        let n = log.constraint_count();
        let mut penalties = vec![Vec::with_capacity(log.rows.len()); n];
        for r in &log.rows {
            for (column, p) in penalties.iter_mut().zip(&r.penalties) {
                column.push(*p);
            }
        }
        Self {
            seed: log.seed,
            config_hash: log.config_hash.clone(),
            episodes: log.episode_count(),
            steps: log.rows.len(),
            final_primary: log.final_window_primary(FINAL_EPISODES),
            violation_steps: log.rows.iter().filter(|r| log.is_violation(r)).count(),
            max_deviation: penalties
                .iter()
                .map(|c| c.iter().copied().fold(0.0, f64::max))
                .collect(),
            falls,
            diverged_at,
            penalties,
        }
    }

    pub fn violation_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.violation_steps as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSummary {
    pub name: String,
    pub tau: f64,
    pub empirical_violation: f64,
    pub kde_violation: f64,
    pub p999: Option<f64>,
    pub max: f64,
}

/// Pooled statistics of one adapter (or one sweep cell) over its seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub trials: usize,
    pub completed: usize,
    pub failures: Vec<CellFailure>,
    /// Per completed trial, in seed order.
    pub final_primary: Vec<f64>,
    pub final_primary_mean: Option<f64>,
    pub final_primary_std: Option<f64>,
    pub final_primary_max: Option<f64>,
    pub steps: usize,
    pub violation_steps: usize,
    pub violation_fraction: f64,
    pub constraints: Vec<ConstraintSummary>,
    pub falls: usize,
    pub diverged: usize,
    pub low_power: bool,
}

/// Folds trials (in the given order) into a group summary. Trials that
/// diverged still contribute their completed steps.
pub fn summarize(
    label: &str,
    names: &[String],
    tau: &[f64],
    trials: &[TrialStats],
    failures: Vec<CellFailure>,
) -> GroupSummary {
    let final_primary: Vec<f64> = trials.iter().filter_map(|t| t.final_primary).collect();
    let steps = trials.iter().map(|t| t.steps).sum();
    let violation_steps = trials.iter().map(|t| t.violation_steps).sum();
    let constraints = names
        .iter()
        .zip(tau)
        .enumerate()
        .map(|(i, (name, &tau))| {
            let pooled: Vec<f64> = trials
                .iter()
                .flat_map(|t| t.penalties[i].iter().copied())
                .collect();
            let above = pooled.iter().filter(|p| **p > tau).count();
            ConstraintSummary {
                name: name.clone(),
                tau,
                empirical_violation: if pooled.is_empty() {
                    0.0
                } else {
                    above as f64 / pooled.len() as f64
                },
                kde_violation: kde_tail_probability(&pooled, tau),
                p999: percentile(&pooled, 99.9).ok(),
                max: pooled.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    let completed = trials.iter().filter(|t| t.diverged_at.is_none()).count();
    GroupSummary {
        label: label.to_string(),
        trials: trials.len() + failures.len(),
        completed,
        failures,
        final_primary_mean: (!final_primary.is_empty()).then(|| mean(&final_primary)),
        final_primary_std: (final_primary.len() >= 2).then(|| sample_std(&final_primary)),
        final_primary_max: final_primary.iter().copied().reduce(f64::max),
        final_primary,
        steps,
        violation_steps,
        violation_fraction: if steps == 0 {
            0.0
        } else {
            violation_steps as f64 / steps as f64
        },
        constraints,
        falls: trials.iter().map(|t| t.falls).sum(),
        diverged: trials.iter().filter(|t| t.diverged_at.is_some()).count(),
        low_power: completed < LOW_POWER_TRIALS,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchSummary {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    /// One-sided p-value for `mean(a) > mean(b)`.
    pub p_greater: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionSummary {
    pub z: f64,
    pub p: f64,
}

/// Final primary reward (Welch) and violation-step counts (two-proportion)
/// of group `a` against group `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub a: String,
    pub b: String,
    pub final_primary: Option<WelchSummary>,
    pub violation: Option<ProportionSummary>,
    pub low_power: bool,
}

pub fn compare_groups(a: &GroupSummary, b: &GroupSummary) -> PairwiseTest {
    let final_primary = welch_t_test(&a.final_primary, &b.final_primary)
        .ok()
        .map(|t| WelchSummary {
            t: t.t,
            df: t.df,
            p_two_sided: t.p_two_sided,
            p_greater: t.p_greater(),
        });
    let violation = two_proportion_test(
        a.violation_steps as u64,
        a.steps as u64,
        b.violation_steps as u64,
        b.steps as u64,
    )
    .ok()
    .map(|z| ProportionSummary { z: z.z, p: z.p });
    PairwiseTest {
        a: a.label.clone(),
        b: b.label.clone(),
        low_power: a.low_power || b.low_power || final_primary.is_none(),
        final_primary,
        violation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub groups: Vec<GroupSummary>,
    /// Every unordered pair, in listing order.
    pub pairwise: Vec<PairwiseTest>,
    pub low_power: bool,
}

impl ComparisonReport {
    pub fn new(episodes: usize, seeds: Vec<u64>, groups: Vec<GroupSummary>) -> Self {
        let mut pairwise = Vec::new();
        for (i, a) in groups.iter().enumerate() {
            for b in &groups[i + 1..] {
                pairwise.push(compare_groups(a, b));
            }
        }
        Self {
            episodes,
            seeds,
            low_power: groups.iter().any(|g| g.low_power),
            groups,
            pairwise,
        }
    }

    pub fn group(&self, label: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.label == label)
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairwiseTest> {
        self.pairwise.iter().find(|p| p.a == a && p.b == b)
    }
}
