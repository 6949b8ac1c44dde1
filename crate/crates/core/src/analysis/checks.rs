//! Numerical checks of the single-constraint reward identity, the
//! primary-reward learning inequality and the near-boundary Lyapunov
//! condition.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config, Error, Result};
use crate::log::TrialLog;
use crate::reward::{combine_reward, roger_gains, ChannelSample, ConstraintSpec, PenaltyEstimate};

/// Largest `|combined − (R₀ − R₀R₁² − R₁³)|` over a grid, where `combined` is
/// the single-constraint ROGER reward with `τ = 1` and `r̃ = R₁`.
pub fn check_reward_identity(
    r0_range: (f64, f64),
    r1_range: (f64, f64),
    resolution: usize,
) -> Result<f64> {
    if !(r1_range.0 >= 0.0 && r1_range.1 < 1.0 && r1_range.0 <= r1_range.1) {
        return Err(config("r1_range must lie within [0, 1)"));
    }
    if resolution < 2 {
        return Err(config("resolution must be >= 2"));
    }
    let spec = ConstraintSpec::with_thresholds(vec![1.0]);
    let lerp = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
    let mut worst = 0.0f64;
    for i in 0..resolution {
        let r1 = lerp(r1_range, i);
        let gains = roger_gains(&PenaltyEstimate::from_values(vec![r1]), &spec)?;
        for j in 0..resolution {
            let r0 = lerp(r0_range, j);
            let total = combine_reward(&ChannelSample::new(r0, vec![r1], 0), &gains)?;
            let closed = r0 - r0 * r1 * r1 - r1 * r1 * r1;
            worst = worst.max(libm::fabs(total - closed));
        }
    }
    Ok(worst)
}

/// Per-episode mean of `value` over each episode's rows.
fn episode_means(log: &TrialLog, value: impl Fn(&crate::log::LogRow) -> f64) -> Vec<f64> {
    log.episodes()
        .map(|rows| rows.iter().map(&value).sum::<f64>() / rows.len() as f64)
        .collect()
}

fn window_means(values: &[f64], window: usize) -> Vec<f64> {
    values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Range of the per-episode mean primary reward.
pub fn primary_range(log: &TrialLog) -> f64 {
    let means = episode_means(log, |r| r.primary);
    let (lo, hi) = means
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    if means.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// One update checkpoint of the primary/penalty trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub episode: usize,
    /// Window-mean primary reward.
    pub r0: f64,
    /// Window-mean first penalty.
    pub r1: f64,
    /// `r0 − r0(t₀)`.
    pub cumulative_change: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningInequality {
    pub violation_fraction: f64,
    pub checkpoints: Vec<Checkpoint>,
}

/// Checks `Σ ΔR₀ ≥ R₀(t₀) − ε` at every checkpoint after the first, using the
/// window-mean primary reward at each full window.
pub fn check_learning_inequality(log: &TrialLog, epsilon: f64) -> Result<LearningInequality> {
    let window = log.episodes_per_window.max(1);
    let r0 = window_means(&episode_means(log, |r| r.primary), window);
    let r1 = window_means(
        &episode_means(log, |r| r.penalties.first().copied().unwrap_or(0.0)),
        window,
    );
    if r0.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "learning inequality needs two checkpoints, log has {}",
            r0.len()
        )));
    }
    let start = r0[0];
    let episode_ids: Vec<usize> = log.episodes().map(|rows| rows[0].episode).collect();
    let checkpoints: Vec<Checkpoint> = r0
        .iter()
        .zip(&r1)
        .enumerate()
        .map(|(k, (&r0, &r1))| {
            let cumulative_change = r0 - start;
            Checkpoint {
                episode: episode_ids[k + window - 1],
                r0,
                r1,
                cumulative_change,
                violated: k > 0 && cumulative_change < start - epsilon,
            }
        })
        .collect();
    let flagged = checkpoints.iter().filter(|c| c.violated).count();
    Ok(LearningInequality {
        violation_fraction: flagged as f64 / (checkpoints.len() - 1) as f64,
        checkpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovVerdict {
    /// Upper confidence bound of the mean change is ≤ 0.
    Decreasing,
    Inconclusive,
    InsufficientData,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovReport {
    pub events: usize,
    pub mean_change: f64,
    /// One-sided 95% upper confidence bound of the mean change.
    pub upper_bound: f64,
    pub verdict: LyapunovVerdict,
}

const Z_95: f64 = 1.6448536269514722;

/// Mean one-update-ahead change of the window-mean first penalty after
/// near-boundary events (`r̃₁ ≥ band·τ₁`), pooled over `logs`.
///
/// Window means are taken per within-episode timestep over the logs' window
/// length; fewer than `min_events` events gives
/// [`LyapunovVerdict::InsufficientData`].
pub fn check_lyapunov_boundary(
    logs: &[&TrialLog],
    band: f64,
    min_events: usize,
) -> Result<LyapunovReport> {
    let mut changes = Vec::new();
    for log in logs {
        let tau = *log
            .tau
            .first()
            .ok_or_else(|| config("log has no constraints"))?;
        let window = log.episodes_per_window.max(1);
        let episodes: Vec<&[crate::log::LogRow]> = log.episodes().collect();
        let window_mean = |end: usize, t: usize| -> Option<f64> {
            let (mut sum, mut n) = (0.0, 0usize);
            for rows in &episodes[end + 1 - window..=end] {
                if let Some(r) = rows.get(t) {
                    sum += r.penalties[0];
                    n += 1;
                }
            }
            (n > 0).then(|| sum / n as f64)
        };
        for e in window.saturating_sub(1)..episodes.len().saturating_sub(1) {
            for row in episodes[e] {
                if row.r_tilde.first().is_some_and(|r| *r >= band * tau) {
                    if let (Some(now), Some(next)) =
                        (window_mean(e, row.t), window_mean(e + 1, row.t))
                    {
                        changes.push(next - now);
                    }
                }
            }
        }
    }
    let events = changes.len();
    if events < min_events.max(2) {
        return Ok(LyapunovReport {
            events,
            mean_change: f64::NAN,
            upper_bound: f64::NAN,
            verdict: LyapunovVerdict::InsufficientData,
        });
    }
    let m = super::mean(&changes);
    let upper_bound = m + Z_95 * super::sample_std(&changes) / libm::sqrt(events as f64);
    Ok(LyapunovReport {
        events,
        mean_change: m,
        upper_bound,
        verdict: if upper_bound <= 0.0 {
            LyapunovVerdict::Decreasing
        } else {
            LyapunovVerdict::Inconclusive
        },
    })
}
