use rand::Rng;
use rand_chacha::ChaCha8Rng;
use roger_core::env::{EnvConfig, EnvObservation, LandscapeConfig, Task};
use roger_core::learner::LearnerConfig;
use roger_core::reward::{
    estimate_penalties, roger_gains, AdapterConfig, AdapterKind, ChannelSample, ConstraintSpec,
};
use roger_core::trial::Trial;
use roger_core::Error;

/// Replays a fixed per-step script; the explored parameters only feed the
/// primary channel so that learning has something to do.
#[derive(Clone)]
struct Scripted {
    penalties: Vec<Vec<f64>>,
    tau: Vec<f64>,
    jitter: f64,
    offset: f64,
    diverge_at: Option<usize>,
}

impl Scripted {
    fn new(penalties: Vec<Vec<f64>>, tau: Vec<f64>) -> Self {
        Self {
            penalties,
            tau,
            jitter: 0.0,
            offset: 0.0,
            diverge_at: None,
        }
    }
}

impl Task for Scripted {
    fn param_dim(&self) -> usize {
        2
    }
    fn constraint_count(&self) -> usize {
        self.tau.len()
    }
    fn max_steps(&self) -> usize {
        self.penalties.len()
    }
    fn tau(&self) -> Vec<f64> {
        self.tau.clone()
    }
    fn state_labels(&self) -> &'static [&'static str] {
        &["s"]
    }
    fn initial_params(&self) -> Vec<f64> {
        vec![0.0; 2]
    }
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> EnvObservation {
        self.offset = self.jitter * rng.random::<f64>();
        EnvObservation {
            state: vec![0.0],
            channels: ChannelSample::new(0.0, vec![0.0; self.tau.len()], 0),
            signed: vec![0.0; self.tau.len()],
            violated: vec![false; self.tau.len()],
            done: false,
        }
    }
    fn step(
        &mut self,
        t: usize,
        params: &[f64],
        action_grads: &mut [f64],
    ) -> Result<EnvObservation, Error> {
        if self.diverge_at == Some(t) {
            return Err(Error::Diverged);
        }
        action_grads.fill(1.0);
        let primary = -(params[0] - 1.0).powi(2) - (params[1] + 0.5).powi(2) + self.offset;
        let penalties: Vec<f64> = self.penalties[t].iter().map(|p| p + self.offset).collect();
        let violated = penalties
            .iter()
            .zip(&self.tau)
            .map(|(p, tau)| p > tau)
            .collect();
        Ok(EnvObservation {
            state: vec![t as f64],
            channels: ChannelSample::new(primary, penalties.clone(), t),
            signed: penalties,
            violated,
            done: t + 1 == self.penalties.len(),
        })
    }
}

fn learner(steps: usize) -> LearnerConfig {
    LearnerConfig {
        timesteps_per_episode: steps,
        return_horizon: 2,
        ..LearnerConfig::default()
    }
}

#[test]
fn roger_matches_primary_only_without_penalties() {
    let task = Scripted::new(vec![vec![0.0, 0.0]; 5], vec![0.5, 0.2]);
    let spec = ConstraintSpec::with_thresholds(vec![0.5, 0.2]);
    let run = |kind| {
        let mut trial = Trial::new(
            task.clone(),
            spec.clone(),
            learner(5),
            &AdapterConfig::new(kind),
            11,
        )
        .unwrap();
        trial.run(40).unwrap();
        (trial.policy().clone(), trial.into_log())
    };
    let (p_roger, log_roger) = run(AdapterKind::Roger);
    let (p_primary, log_primary) = run(AdapterKind::PrimaryOnly);
    assert_eq!(p_roger, p_primary);
    assert_eq!(log_roger.params, log_primary.params);
    for (a, b) in log_roger.rows.iter().zip(&log_primary.rows) {
        assert_eq!(a.primary.to_bits(), b.primary.to_bits());
        assert_eq!(a.lambda0, 1.0);
        assert_eq!(a.g_combined.to_bits(), b.g_combined.to_bits());
    }
    assert_ne!(p_roger.theta, vec![0.0, 0.0]);
}

#[test]
fn reruns_are_identical() {
    let env = EnvConfig::Landscape(LandscapeConfig::default());
    let spec = ConstraintSpec::with_thresholds(env.tau());
    let cfg = LearnerConfig {
        eta_theta: 2e-4,
        eta_sigma: 2e-5,
        sigma_init: 0.1,
        sigma_min: Some(0.03),
        ..LearnerConfig::default()
    };
    let run = |seed| {
        let mut trial = Trial::new(
            env.build(),
            spec.clone(),
            cfg.clone(),
            &AdapterConfig::new(AdapterKind::Roger),
            seed,
        )
        .unwrap();
        trial.run(60).unwrap();
        trial.into_log()
    };
    assert_eq!(run(4), run(4));
    assert_ne!(run(4).rows, run(5).rows);
}

#[test]
fn window_gains_replay_offline() {
    let script = vec![vec![0.1, 0.05], vec![0.3, 0.1], vec![0.2, 0.15]];
    let mut task = Scripted::new(script.clone(), vec![0.5, 0.2]);
    task.jitter = 0.05;
    let spec = ConstraintSpec::with_thresholds(vec![0.5, 0.2]);
    let mut trial = Trial::new(
        task,
        spec.clone(),
        learner(3),
        &AdapterConfig::new(AdapterKind::Roger),
        3,
    )
    .unwrap();
    trial.run(8).unwrap();

    // Buffer holds the script (shifted by each episode's reset offset).
    let buffer = trial.buffer();
    assert_eq!(buffer.len(), 8);
    for e in buffer.episodes() {
        let offset = e.samples[0].penalties[0] - script[0][0];
        for (t, s) in e.samples.iter().enumerate() {
            for (i, p) in s.penalties.iter().enumerate() {
                assert!((p - script[t][i] - offset).abs() < 1e-12);
            }
        }
    }

    // Gains logged for the last episode equal roger_gains on the same window.
    let log = trial.log();
    let last: Vec<_> = log.rows.iter().filter(|r| r.episode == 7).collect();
    for (t, row) in last.iter().enumerate() {
        let window: Vec<ChannelSample> = buffer.episodes().map(|e| e.samples[t].clone()).collect();
        let est = estimate_penalties(&window, &spec, None).unwrap();
        let gains = roger_gains(&est, &spec).unwrap();
        assert!((row.lambda0 - gains.lambda0).abs() < 1e-12);
        for (a, b) in row.lambda.iter().zip(&gains.lambda) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((row.delta - gains.delta_t).abs() < 1e-12);
        for (a, b) in row.r_tilde.iter().zip(&est.r_tilde) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn no_update_before_the_window_fills() {
    let task = Scripted::new(vec![vec![0.0]; 4], vec![0.5]);
    let spec = ConstraintSpec::with_thresholds(vec![0.5]);
    let mut trial = Trial::new(
        task,
        spec,
        learner(4),
        &AdapterConfig::new(AdapterKind::Roger),
        0,
    )
    .unwrap();
    for ep in 0..8 {
        let outcome = trial.run_episode().unwrap();
        assert_eq!(outcome.updated, ep == 7, "episode {ep}");
    }
    let params = &trial.log().params;
    assert!(params[..7].iter().all(|p| p == &vec![0.0, 0.0]));
    assert_ne!(params[7], vec![0.0, 0.0]);
}

#[test]
fn diverged_episodes_are_flagged_and_skipped() {
    let mut task = Scripted::new(vec![vec![0.0]; 4], vec![0.5]);
    task.diverge_at = Some(2);
    let spec = ConstraintSpec::with_thresholds(vec![0.5]);
    let mut trial = Trial::new(
        task,
        spec,
        learner(4),
        &AdapterConfig::new(AdapterKind::Roger),
        0,
    )
    .unwrap();
    let outcome = trial.run_episode().unwrap();
    assert!(outcome.diverged && !outcome.updated);
    assert_eq!(trial.log().failed_episodes, vec![0]);
    assert_eq!(trial.log().rows.len(), 2);
    assert!(trial.buffer().is_empty());
}

#[test]
fn rejects_mismatched_thresholds() {
    let task = Scripted::new(vec![vec![0.0]; 2], vec![0.5]);
    let err = Trial::new(
        task.clone(),
        ConstraintSpec::with_thresholds(vec![0.4]),
        learner(2),
        &AdapterConfig::new(AdapterKind::Roger),
        0,
    );
    assert!(err.is_err());
    let err = Trial::new(
        task,
        ConstraintSpec::with_thresholds(vec![0.5, 0.5]),
        learner(2),
        &AdapterConfig::new(AdapterKind::Roger),
        0,
    );
    assert!(matches!(err, Err(Error::ArityMismatch { .. })));
}
