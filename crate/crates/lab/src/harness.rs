//! Seeded trial execution, comparisons and grid sweeps.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use roger_core::env::Task;
use roger_core::log::TrialLog;
use roger_core::reward::AdapterConfig;
use roger_core::trial::Trial;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::logio::{write_log, LogFormat};
use crate::report::{summarize, CellFailure, ComparisonReport, GroupSummary, TrialStats};

/// Runs one trial in memory, stopping after the first diverged episode.
pub fn execute(cfg: &ExperimentConfig, seed: u64) -> Result<(TrialLog, TrialStats)> {
    let task = cfg.env.build();
    let fall = task.fall_threshold();
    let mut trial = Trial::new(task, cfg.spec(), cfg.learner(), &cfg.adapter, seed)?
        .with_config_hash(cfg.hash());
    let mut falls = 0;
    let mut diverged_at = None;
    for ep in 0..cfg.episodes {
        let outcome = trial.run_episode()?;
        falls += usize::from(outcome.fell && fall.is_some());
        if outcome.diverged {
            diverged_at = Some(ep);
            break;
        }
    }
    let log = trial.into_log();
    let stats = TrialStats::from_log(&log, falls, diverged_at);
    Ok((log, stats))
}

/// One manifest line per written trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub log: PathBuf,
    pub seed: u64,
    pub config_hash: String,
    pub episodes: usize,
    pub steps: usize,
    pub final_primary: Option<f64>,
    pub violation_steps: usize,
    pub violation_fraction: f64,
    pub max_deviation: Vec<f64>,
    pub falls: usize,
    pub diverged_at: Option<usize>,
}

impl ManifestEntry {
    pub fn new(log: PathBuf, stats: &TrialStats) -> Self {
        Self {
            log,
            seed: stats.seed,
            config_hash: stats.config_hash.clone(),
            episodes: stats.episodes,
            steps: stats.steps,
            final_primary: stats.final_primary,
            violation_steps: stats.violation_steps,
            violation_fraction: stats.violation_fraction(),
            max_deviation: stats.max_deviation.clone(),
            falls: stats.falls,
            diverged_at: stats.diverged_at,
        }
    }
}

pub fn append_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let path = dir.join("manifest.jsonl");
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| LabError::io(&path, e))?;
    let mut text = String::new();
    for e in entries {
        text.push_str(&serde_json::to_string(e).expect("manifest entry serializes"));
        text.push('\n');
    }
    file.write_all(text.as_bytes())
        .map_err(|e| LabError::io(&path, e))
}

pub fn log_path(dir: &Path, seed: u64, format: LogFormat) -> PathBuf {
    dir.join(format!("seed{seed}.{}", format.extension()))
}

/// Runs and records one trial under `dir`. A diverged trial still writes its
/// partial log and manifest line, then reports [`LabError::Diverged`].
pub fn run_trial(
    cfg: &ExperimentConfig,
    seed: u64,
    dir: &Path,
    format: LogFormat,
) -> Result<ManifestEntry> {
    cfg.validate()?;
    let (log, stats) = execute(cfg, seed)?;
    let path = log_path(dir, seed, format);
    write_log(&log, &path, format)?;
    let entry = ManifestEntry::new(path.clone(), &stats);
    append_manifest(dir, std::slice::from_ref(&entry))?;
    match stats.diverged_at {
        Some(episode) => Err(LabError::Diverged {
            seed,
            episode,
            log: path,
        }),
        None => Ok(entry),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(LabError::Config("--jobs must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::Config(e.to_string()))
}

/// Result of one (configuration, seed) cell: statistics, or why it failed.
type CellResult = std::result::Result<TrialStats, String>;

/// Runs every `(config, seed)` pair on `jobs` workers. Results come back in
/// input order; `keep_log` sees each finished log on the worker thread.
fn run_cells<F>(
    cells: &[(&ExperimentConfig, u64)],
    jobs: usize,
    keep_log: F,
) -> Result<Vec<CellResult>>
where
    F: Fn(usize, &TrialLog) -> Result<()> + Sync,
{
    let pool = pool(jobs)?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, (cfg, seed))| {
                let (log, stats) = execute(cfg, *seed).map_err(|e| e.to_string())?;
                keep_log(i, &log).map_err(|e| e.to_string())?;
                Ok(stats)
            })
            .collect()
    }))
}

fn group(
    label: &str,
    cfg: &ExperimentConfig,
    results: &[CellResult],
    seeds: &[u64],
) -> GroupSummary {
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (r, seed) in results.iter().zip(seeds) {
        match r {
            Ok(stats) => {
                if let Some(ep) = stats.diverged_at {
                    failures.push(CellFailure {
                        seed: *seed,
                        reason: format!("diverged at episode {ep}"),
                    });
                }
                trials.push(stats.clone());
            }
            Err(reason) => failures.push(CellFailure {
                seed: *seed,
                reason: reason.clone(),
            }),
        }
    }
    // Diverged trials appear both as partial trials and as failures.
    let diverged = failures
        .iter()
        .filter(|f| f.reason.starts_with("diverged"))
        .count();
    let mut g = summarize(label, &cfg.spec().names, &cfg.env.tau(), &trials, failures);
    g.trials -= diverged;
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledAdapter {
    pub label: String,
    pub adapter: AdapterConfig,
}

/// Several adapters on one shared environment, learner and seed list. The
/// adapter inside `base` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub base: ExperimentConfig,
    pub adapters: Vec<LabeledAdapter>,
}

impl CompareSpec {
    pub fn configs(&self) -> Result<Vec<ExperimentConfig>> {
        if self.adapters.len() < 2 {
            return Err(LabError::Config(
                "adapters must list at least two entries".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        self.adapters
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let ok = !a.label.is_empty()
                    && a.label
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
                    && !a.label.starts_with('.');
                if !ok {
                    return Err(LabError::Config(format!(
                        "adapters[{i}].label {:?} is not a plain name",
                        a.label
                    )));
                }
                if !seen.insert(a.label.as_str()) {
                    return Err(LabError::Config(format!(
                        "adapters[{i}].label {:?} is repeated",
                        a.label
                    )));
                }
                let mut cfg = self.base.clone();
                cfg.adapter = a.adapter.clone();
                cfg.validate()
                    .map_err(|e| LabError::Config(format!("adapters[{i}] ({}): {e}", a.label)))?;
                Ok(cfg)
            })
            .collect()
    }
}

/// Runs every adapter on every seed and aggregates. Logs go to
/// `out/<label>/` when `out` is given; failed cells are listed per group.
pub fn run_compare(
    spec: &CompareSpec,
    jobs: usize,
    out: Option<(&Path, LogFormat)>,
) -> Result<ComparisonReport> {
    let configs = spec.configs()?;
    let seeds = &spec.base.seeds;
    let cells: Vec<(&ExperimentConfig, u64)> = configs
        .iter()
        .flat_map(|c| seeds.iter().map(move |s| (c, *s)))
        .collect();
    let dir_of = |i: usize| out.map(|(dir, _)| dir.join(&spec.adapters[i / seeds.len()].label));
    let results = run_cells(&cells, jobs, |i, log| match (dir_of(i), out) {
        (Some(dir), Some((_, format))) => write_log(log, &log_path(&dir, log.seed, format), format),
        _ => Ok(()),
    })?;

    let groups = configs
        .iter()
        .zip(&spec.adapters)
        .zip(results.chunks(seeds.len()))
        .map(|((cfg, a), r)| group(&a.label, cfg, r, seeds))
        .collect();
    if let Some((dir, format)) = out {
        let mut entries = Vec::new();
        for (i, r) in results.iter().enumerate() {
            if let (Ok(stats), Some(d)) = (r, dir_of(i)) {
                entries.push(ManifestEntry::new(log_path(&d, stats.seed, format), stats));
            }
        }
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        append_manifest(dir, &entries)?;
    }
    Ok(ComparisonReport::new(
        spec.base.episodes,
        seeds.clone(),
        groups,
    ))
}

fn default_budget() -> usize {
    10_000
}

fn default_repetitions() -> usize {
    10
}

/// One grid axis: a JSON pointer into the base configuration and the values
/// it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<Value>,
}

/// Cartesian grid over `axes`; each cell runs seeds `0..repetitions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Upper bound on cells × repetitions.
    #[serde(default = "default_budget")]
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub values: Vec<Value>,
    pub summary: GroupSummary,
    /// A fall or a diverged trial.
    pub failure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axes: Vec<String>,
    pub repetitions: usize,
    pub cells: Vec<SweepCell>,
}

fn unescape(token: &str) -> String {
    token.replace("~1", "/").replace("~0", "~")
}

/// Sets the value at a JSON pointer, creating the last key if its parent
/// object exists.
fn set_pointer(doc: &mut Value, pointer: &str, value: Value) -> std::result::Result<(), String> {
    if let Some(slot) = doc.pointer_mut(pointer) {
        *slot = value;
        return Ok(());
    }
    let (parent, last) = pointer
        .rsplit_once('/')
        .ok_or_else(|| format!("{pointer:?} is not a JSON pointer"))?;
    match doc.pointer_mut(parent) {
        Some(Value::Object(map)) => {
            map.insert(unescape(last), value);
            Ok(())
        }
        _ => Err(format!("{pointer:?} does not name a configuration field")),
    }
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Configurations of every cell, last axis varying fastest.
    pub fn cells(&self) -> Result<Vec<(Vec<Value>, ExperimentConfig)>> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(LabError::Config(
                "axes must be non-empty, each with at least one value".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(LabError::Config("repetitions must be >= 1".into()));
        }
        let needed = self.cell_count() * self.repetitions;
        if needed > self.budget {
            return Err(LabError::Budget {
                needed,
                budget: self.budget,
            });
        }
        let mut base = self.base.clone();
        base.learner = Some(base.learner());
        base.seeds = (0..self.repetitions as u64).collect();
        let base = serde_json::to_value(&base).expect("config serializes");
        let mut out = Vec::with_capacity(self.cell_count());
        for k in 0..self.cell_count() {
            let mut rest = k;
            let mut values = vec![Value::Null; self.axes.len()];
            for (d, axis) in self.axes.iter().enumerate().rev() {
                values[d] = axis.values[rest % axis.values.len()].clone();
                rest /= axis.values.len();
            }
            let mut doc = base.clone();
            for (axis, v) in self.axes.iter().zip(&values) {
                set_pointer(&mut doc, &axis.path, v.clone())
                    .map_err(|m| LabError::Config(format!("axes: {m}")))?;
            }
            let label = cell_label(&self.axes, &values);
            let cfg: ExperimentConfig = serde_json::from_value(doc)
                .map_err(|e| LabError::Config(format!("cell {label}: {e}")))?;
            cfg.validate()
                .map_err(|e| LabError::Config(format!("cell {label}: {e}")))?;
            out.push((values, cfg));
        }
        Ok(out)
    }
}

fn cell_label(axes: &[SweepAxis], values: &[Value]) -> String {
    axes.iter()
        .zip(values)
        .map(|(a, v)| format!("{}={v}", a.path))
        .collect::<Vec<_>>()
        .join(",")
}

/// Runs the grid. The budget is checked before anything starts.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepTable> {
    let cells = spec.cells()?;
    let seeds: Vec<u64> = (0..spec.repetitions as u64).collect();
    let work: Vec<(&ExperimentConfig, u64)> = cells
        .iter()
        .flat_map(|(_, c)| seeds.iter().map(move |s| (c, *s)))
        .collect();
    let results = run_cells(&work, jobs, |_, _| Ok(()))?;
    let cells = cells
        .iter()
        .zip(results.chunks(seeds.len()))
        .map(|((values, cfg), r)| {
            let summary = group(&cell_label(&spec.axes, values), cfg, r, &seeds);
            SweepCell {
                values: values.clone(),
                failure: summary.falls > 0 || !summary.failures.is_empty(),
                summary,
            }
        })
        .collect();
    Ok(SweepTable {
        axes: spec.axes.iter().map(|a| a.path.clone()).collect(),
        repetitions: spec.repetitions,
        cells,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = self
            .cells
            .first()
            .map(|c| {
                c.summary
                    .constraints
                    .iter()
                    .map(|k| k.name.as_str())
                    .collect()
            })
            .unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.axes.clone();
        header.extend(
            [
                "final_primary_mean",
                "final_primary_max",
                "violation_fraction",
            ]
            .map(String::from),
        );
        header.extend(names.iter().map(|n| format!("p999_{n}")));
        header.extend(["falls", "diverged", "failure"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for c in &self.cells {
            let mut row: Vec<String> = c.values.iter().map(Value::to_string).collect();
            row.push(opt(c.summary.final_primary_mean));
            row.push(opt(c.summary.final_primary_max));
            row.push(c.summary.violation_fraction.to_string());
            row.extend(c.summary.constraints.iter().map(|k| opt(k.p999)));
            row.push(c.summary.falls.to_string());
            row.push(c.summary.diverged.to_string());
            row.push(c.failure.to_string());
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use roger_core::env::{EnvConfig, LandscapeConfig};
    use roger_core::reward::AdapterKind;
    use serde_json::json;

    fn landscape(kind: AdapterKind, episodes: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            EnvConfig::Landscape(LandscapeConfig::default()),
            AdapterConfig::new(kind),
        );
        cfg.episodes = episodes;
        cfg.seeds = vec![0, 1, 2];
        cfg
    }

    #[test]
    fn pointer_updates_existing_and_new_keys() {
        let mut doc = json!({"adapter": {"kind": "roger"}, "env": {"tau": 0.5}});
        set_pointer(&mut doc, "/env/tau", json!(0.3)).unwrap();
        set_pointer(&mut doc, "/adapter/fixed_gains", json!([1.0])).unwrap();
        assert_eq!(
            doc,
            json!({"adapter": {"kind": "roger", "fixed_gains": [1.0]}, "env": {"tau": 0.3}})
        );
        assert!(set_pointer(&mut doc, "/nope/x", json!(1)).is_err());
        assert!(set_pointer(&mut doc, "nope", json!(1)).is_err());
    }

    #[test]
    fn budget_is_checked_first() {
        let spec = SweepSpec {
            base: landscape(AdapterKind::Roger, 5),
            axes: vec![SweepAxis {
                path: "/env/tau".into(),
                values: vec![json!(0.5), json!(0.6), json!(0.7)],
            }],
            repetitions: 4,
            budget: 11,
        };
        assert!(matches!(
            run_sweep(&spec, 1),
            Err(LabError::Budget {
                needed: 12,
                budget: 11
            })
        ));
    }

    #[test]
    fn cells_vary_last_axis_fastest() {
        let spec = SweepSpec {
            base: landscape(AdapterKind::FixedPenalty, 5),
            axes: vec![
                SweepAxis {
                    path: "/env/tau".into(),
                    values: vec![json!(0.5), json!(0.7)],
                },
                SweepAxis {
                    path: "/adapter/fixed_gains".into(),
                    values: vec![json!([1.0]), json!([2.0]), json!([3.0])],
                },
            ],
            repetitions: 2,
            budget: 100,
        };
        let cells = spec.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[1].0, vec![json!(0.5), json!([2.0])]);
        assert_eq!(cells[3].1.env.tau(), vec![0.7]);
        assert_eq!(cells[3].1.adapter.fixed_gains, Some(vec![1.0]));
        assert_eq!(cells[0].1.seeds, vec![0, 1]);
        let mut bad = spec.clone();
        bad.axes[0].values[0] = json!(-1.0);
        assert!(bad.cells().unwrap_err().to_string().contains("env.tau"));
    }

    #[test]
    fn single_cell_sweep_matches_trials() {
        let base = landscape(AdapterKind::Roger, 30);
        let spec = SweepSpec {
            base: base.clone(),
            axes: vec![SweepAxis {
                path: "/env/tau".into(),
                values: vec![json!(0.75)],
            }],
            repetitions: 3,
            budget: 3,
        };
        let table = run_sweep(&spec, 2).unwrap();
        let trials: Vec<TrialStats> = (0..3).map(|s| execute(&base, s).unwrap().1).collect();
        let direct = summarize(
            &table.cells[0].summary.label,
            &base.spec().names,
            &base.env.tau(),
            &trials,
            vec![],
        );
        assert_eq!(table.cells[0].summary, direct);
        assert!(!table.cells[0].failure);
        let csv = table.to_csv();
        assert!(csv.starts_with(
            "/env/tau,final_primary_mean,final_primary_max,violation_fraction,p999_hazard,"
        ));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn compare_is_independent_of_worker_count() {
        let mut base = landscape(AdapterKind::Roger, 40);
        base.seeds = (0..6).collect();
        let spec = CompareSpec {
            base,
            adapters: vec![
                LabeledAdapter {
                    label: "roger".into(),
                    adapter: AdapterConfig::new(AdapterKind::Roger),
                },
                LabeledAdapter {
                    label: "primary".into(),
                    adapter: AdapterConfig::new(AdapterKind::PrimaryOnly),
                },
            ],
        };
        let one = run_compare(&spec, 1, None).unwrap();
        let many = run_compare(&spec, 8, None).unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&many).unwrap()
        );
        assert_eq!(one.pairwise.len(), 1);
        assert_eq!(one.group("roger").unwrap().completed, 6);
    }

    #[test]
    fn compare_rejects_bad_listings() {
        let base = landscape(AdapterKind::Roger, 1);
        let a = |label: &str| LabeledAdapter {
            label: label.into(),
            adapter: AdapterConfig::new(AdapterKind::Roger),
        };
        for adapters in [vec![a("x")], vec![a("x"), a("x")], vec![a("x"), a("../y")]] {
            let spec = CompareSpec {
                base: base.clone(),
                adapters,
            };
            assert_eq!(run_compare(&spec, 1, None).unwrap_err().exit_code(), 2);
        }
    }
}
