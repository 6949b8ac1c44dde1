//! The episode loop: explore, roll out, store the episode, recompute gains
//! from the stored window and update the policy once the window is full.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::env::Task;
use crate::error::{check_arity, config, Error, Result};
use crate::learner::{agol_update, Episode, LearnerConfig, PolicyState, TrajectoryBuffer};
use crate::log::{LogRow, TrialLog};
use crate::reward::{
    penalty_statistic, AdapterConfig, AdapterState, ChannelSample, ConstraintSpec, GainVector,
    PenaltyEstimate, StatisticBase,
};
use crate::rng::{episode_rng, Purpose};

/// What happened in one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeOutcome {
    pub steps: usize,
    pub updated: bool,
    pub diverged: bool,
    pub fell: bool,
}

/// One seeded training run of a task under a gain adapter.
#[derive(Debug, Clone)]
pub struct Trial<T: Task> {
    task: T,
    spec: ConstraintSpec,
    cfg: LearnerConfig,
    adapter: AdapterState,
    policy: PolicyState,
    buffer: TrajectoryBuffer,
    seed: u64,
    episode: u64,
    log: TrialLog,
}

impl<T: Task> Trial<T> {
    pub fn new(
        task: T,
        spec: ConstraintSpec,
        cfg: LearnerConfig,
        adapter: &AdapterConfig,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        check_arity(task.constraint_count(), spec.len())?;
        if task.tau() != spec.tau {
            return Err(config(
                "constraint thresholds differ between environment and constraint spec",
            ));
        }
        let adapter = AdapterState::from_config(adapter, spec.len())?;
        let policy = PolicyState::new(task.initial_params(), cfg.sigma_init);
        let names = if spec.names.is_empty() {
            (0..spec.len()).map(|i| alloc::format!("c{i}")).collect()
        } else {
            spec.names.clone()
        };
        let log = TrialLog {
            seed,
            config_hash: String::new(),
            state_labels: task.state_labels().iter().map(|s| s.to_string()).collect(),
            constraint_names: names,
            tau: spec.tau.clone(),
            episodes_per_window: cfg.episodes_per_window,
            ..TrialLog::default()
        };
        Ok(Self {
            buffer: TrajectoryBuffer::new(cfg.episodes_per_window),
            task,
            spec,
            cfg,
            adapter,
            policy,
            seed,
            episode: 0,
            log,
        })
    }

    pub fn with_config_hash(mut self, hash: impl Into<String>) -> Self {
        self.log.config_hash = hash.into();
        self
    }

    pub fn policy(&self) -> &PolicyState {
        &self.policy
    }

    pub fn adapter(&self) -> &AdapterState {
        &self.adapter
    }

    pub fn buffer(&self) -> &TrajectoryBuffer {
        &self.buffer
    }

    pub fn spec(&self) -> &ConstraintSpec {
        &self.spec
    }

    pub fn log(&self) -> &TrialLog {
        &self.log
    }

    pub fn into_log(self) -> TrialLog {
        self.log
    }

    /// Runs `episodes` episodes, stopping at the first hard error. The log
    /// keeps everything recorded up to that point.
    pub fn run(&mut self, episodes: usize) -> Result<()> {
        for _ in 0..episodes {
            self.run_episode()?;
        }
        Ok(())
    }

    pub fn run_episode(&mut self) -> Result<EpisodeOutcome> {
        let ep = self.episode;
        self.episode += 1;
        self.policy
            .explore(&mut episode_rng(self.seed, ep, Purpose::Exploration));
        self.task
            .reset(&mut episode_rng(self.seed, ep, Purpose::Reset));

        let steps = self.cfg.timesteps_per_episode.min(self.task.max_steps());
        let explored = self.policy.theta_explored.clone();
        let mut episode = Episode::explored_from(&self.policy);
        let mut raw: Vec<(Vec<f64>, f64, Vec<f64>)> = Vec::with_capacity(steps);
        let mut grads = vec![0.0; self.policy.dim()];
        let mut diverged = false;
        let mut fell = false;
        for t in 0..steps {
            let obs = match self.task.step(t, &explored, &mut grads) {
                Ok(obs) => obs,
                Err(Error::Diverged) => {
                    diverged = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let effective = obs
                .channels
                .penalties
                .iter()
                .enumerate()
                .map(|(i, p)| self.adapter.effective_penalty(i, *p, &self.spec))
                .collect::<Result<Vec<_>>>()?;
            episode.push(
                ChannelSample::new(obs.channels.primary, effective, t),
                obs.signed,
                grads.clone(),
            );
            if let Some(limit) = self.task.fall_threshold() {
                fell |= obs.channels.penalties[0] >= limit;
            }
            raw.push((obs.state, obs.channels.primary, obs.channels.penalties));
            if obs.done {
                break;
            }
        }

        if diverged {
            self.log.failed_episodes.push(ep as usize);
        } else if !episode.is_empty() {
            self.buffer.push(episode.clone());
        }

        let (gains, estimates) = self.window_gains()?;
        let updated = !diverged && self.buffer.is_full();
        if updated {
            let step = agol_update(&self.policy, &self.buffer, &gains, &self.cfg)?;
            self.adapter.observe_directions(&step.directions)?;
            self.policy.theta = step.policy.theta;
            self.policy.sigma_theta = step.policy.sigma_theta;
        }

        self.record(ep as usize, &episode, raw, &gains, &estimates);
        self.log.params.push(self.policy.theta.clone());
        Ok(EpisodeOutcome {
            steps: episode.len(),
            updated,
            diverged,
            fell,
        })
    }

    /// Penalty estimate over the stored window, optionally restricted to one
    /// within-episode timestep.
    fn estimate(&self, t: Option<usize>) -> PenaltyEstimate {
        let n = self.spec.len();
        let mut column = Vec::new();
        let mut r_tilde = vec![0.0; n];
        for (i, r) in r_tilde.iter_mut().enumerate() {
            column.clear();
            for e in self.buffer.episodes() {
                let range = match t {
                    Some(t) if t < e.len() => t..t + 1,
                    Some(_) => continue,
                    None => 0..e.len(),
                };
                for k in range {
                    column.push(match self.spec.base {
                        StatisticBase::Magnitude => e.samples[k].penalties[i],
                        StatisticBase::SignedState => e.signed[k][i],
                    });
                }
            }
            if !column.is_empty() {
                *r = penalty_statistic(&column, self.spec.k_sigma, self.spec.sign, self.spec.base);
            }
        }
        PenaltyEstimate {
            r_tilde,
            window_len: column.len(),
            per_timestep: t.is_some(),
        }
    }

    /// Per-timestep gains for the current window and the estimates behind them.
    fn window_gains(&mut self) -> Result<(Vec<GainVector>, Vec<PenaltyEstimate>)> {
        let n = self.spec.len();
        let len = self.buffer.max_len().max(1);
        if self.buffer.is_empty() {
            let zero = PenaltyEstimate::from_values(vec![0.0; n]);
            return Ok((vec![GainVector::primary_only(n); len], vec![zero; len]));
        }
        let (per_t, pooled) = if self.adapter.uses_estimates() {
            let pooled = self.estimate(None);
            let per_t = if self.cfg.per_timestep_gains {
                (0..len).map(|t| self.estimate(Some(t))).collect()
            } else {
                vec![pooled.clone(); len]
            };
            (per_t, pooled)
        } else {
            let zero = PenaltyEstimate::from_values(vec![0.0; n]);
            (vec![zero.clone(); len], zero)
        };
        let gains = self.adapter.window_gains(&per_t, &pooled, &self.spec)?;
        Ok((gains, per_t))
    }

    fn record(
        &mut self,
        ep: usize,
        episode: &Episode,
        raw: Vec<(Vec<f64>, f64, Vec<f64>)>,
        gains: &[GainVector],
        estimates: &[PenaltyEstimate],
    ) {
        let horizon = self.cfg.return_horizon;
        let len = episode.len();
        let returns = |value: &dyn Fn(&ChannelSample) -> f64| -> Vec<f64> {
            let column: Vec<f64> = episode.samples.iter().map(value).collect();
            crate::learner::horizon_returns(&column, horizon)
        };
        let primary_g = returns(&|s| s.primary);
        let penalty_g: Vec<Vec<f64>> = (0..self.spec.len())
            .map(|i| returns(&|s| s.penalties[i]))
            .collect();

        for (t, (state, primary, penalties)) in raw.into_iter().enumerate() {
            let g = &gains[t.min(gains.len() - 1)];
            let est = &estimates[t.min(estimates.len() - 1)];
            let g_combined = if t < len {
                penalty_g
                    .iter()
                    .zip(&g.lambda)
                    .fold(g.lambda0 * primary_g[t], |acc, (pg, l)| acc - l * pg[t])
            } else {
                0.0
            };
            self.log.rows.push(LogRow {
                episode: ep,
                t,
                state,
                primary,
                penalties,
                lambda0: g.lambda0,
                lambda: g.lambda.clone(),
                delta: g.delta_t,
                r_tilde: est.r_tilde.clone(),
                g_combined,
            });
        }
    }
}
