use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roger_core::analysis::{
    check_learning_inequality, check_lyapunov_boundary, check_reward_identity, primary_range,
    surface_grid,
};
use roger_core::reward::ConstraintSpec;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use roger_lab::config::ExperimentConfig;
use roger_lab::harness::{run_compare, run_sweep, run_trial, CompareSpec, SweepSpec};
use roger_lab::logio::{read_log, trajectory_csv, LogFormat};
use roger_lab::report::{summarize, ComparisonReport, TrialStats};
use roger_lab::{LabError, Result};

#[derive(Parser)]
#[command(
    name = "roger",
    version,
    about = "Constrained policy search experiments with adaptive reward weighting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment, comparison or sweep document (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the document's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum concurrent trials.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = LogFormat::Csv)]
    format: LogFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and write its log.
    Run {
        #[command(flatten)]
        common: Common,
        /// Defaults to the first seed of the document.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several adapters over shared seeds and report pairwise tests.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Grid search over configuration fields.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Two-constraint gain surface as CSV.
    Surface {
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Post-hoc checks on existing trial logs.
    Analyze {
        #[arg(long = "log", required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        /// Near-boundary band for the Lyapunov monitor, as a fraction of τ.
        #[arg(long, default_value_t = 0.95)]
        band: f64,
        #[arg(long, default_value_t = 100)]
        min_events: usize,
        /// Learning-inequality slack as a fraction of each log's primary range.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Directory for R₀–R₁ trajectory tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io {
        path: path.into(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::Io {
            path: dir.into(),
            source: e,
        })?;
    }
    std::fs::write(path, contents).map_err(|e| LabError::Io {
        path: path.into(),
        source: e,
    })
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn surface_csv(resolution: usize) -> Result<String> {
    let grid = surface_grid(resolution, &ConstraintSpec::with_thresholds(vec![1.0, 1.0]))?;
    let mut s = String::from("u1,u2,lambda0,lambda1,lambda2\n");
    for p in grid {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            p.u1, p.u2, p.lambda0, p.lambda1, p.lambda2
        ));
    }
    Ok(s)
}

fn analyze(
    logs: &[PathBuf],
    band: f64,
    min_events: usize,
    epsilon: f64,
    out: Option<&Path>,
) -> Result<Value> {
    let loaded = logs
        .iter()
        .map(|p| read_log(p))
        .collect::<Result<Vec<_>>>()?;
    let mut per_log = Vec::new();
    let mut groups = Vec::new();
    let (mut r0_lo, mut r0_hi, mut r1_hi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (path, log) in logs.iter().zip(&loaded) {
        for r in &log.rows {
            r0_lo = r0_lo.min(r.primary);
            r0_hi = r0_hi.max(r.primary);
            if let (Some(p), Some(t)) = (r.penalties.first(), log.tau.first()) {
                r1_hi = r1_hi.max(p / t);
            }
        }
        let label = path.display().to_string();
        let stats = TrialStats::from_log(log, 0, None);
        groups.push(summarize(
            &label,
            &log.constraint_names,
            &log.tau,
            &[stats],
            vec![],
        ));
        let eps = epsilon * primary_range(log);
        let inequality = match check_learning_inequality(log, eps) {
            Ok(li) => {
                if let Some(dir) = out {
                    let stem = path
                        .file_stem()
                        .map_or("log".into(), |s| s.to_string_lossy().into_owned());
                    write_file(
                        &dir.join(format!("trajectory_{stem}.csv")),
                        &trajectory_csv(&li.checkpoints),
                    )?;
                }
                json!({
                    "epsilon": eps,
                    "checkpoints": li.checkpoints.len(),
                    "flagged": li.checkpoints.iter().filter(|c| c.violated).count(),
                    "violation_fraction": li.violation_fraction,
                })
            }
            Err(e) => json!({ "epsilon": eps, "error": e.to_string() }),
        };
        per_log.push(json!({
            "path": path,
            "seed": log.seed,
            "config_hash": log.config_hash,
            "episodes": log.episode_count(),
            "failed_episodes": log.failed_episodes,
            "learning_inequality": inequality,
        }));
    }

    let (r0_range, r1_range) = if r0_lo <= r0_hi {
        ((r0_lo, r0_hi), (0.0, r1_hi.min(0.99)))
    } else {
        ((0.0, 1.0), (0.0, 0.99))
    };
    let identity = check_reward_identity(r0_range, r1_range, 100)?;
    let refs: Vec<_> = loaded.iter().filter(|l| !l.tau.is_empty()).collect();
    let lyapunov = match check_lyapunov_boundary(&refs, band, min_events) {
        Ok(r) => json!({
            "band": band,
            "events": r.events,
            "mean_change": r.mean_change.is_finite().then_some(r.mean_change),
            "upper_bound": r.upper_bound.is_finite().then_some(r.upper_bound),
            "verdict": format!("{:?}", r.verdict),
        }),
        Err(e) => json!({ "band": band, "error": e.to_string() }),
    };
    let report = ComparisonReport::new(0, loaded.iter().map(|l| l.seed).collect(), groups);
    Ok(json!({
        "reward_identity": {
            "r0_range": r0_range,
            "r1_range": r1_range,
            "max_deviation": identity,
            "pass": identity <= 1e-12,
        },
        "logs": per_log,
        "lyapunov": lyapunov,
        "statistics": report.groups,
        "pairwise": report.pairwise,
    }))
}

fn output_dir(cli_out: Option<PathBuf>, doc_out: Option<&PathBuf>) -> Option<PathBuf> {
    cli_out.or_else(|| doc_out.cloned())
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            Ok(pretty(&json!({ "valid": true, "config_hash": cfg.hash() })))
        }
        Command::Run { common, seed } => {
            let cfg = ExperimentConfig::load(&common.config)?;
            cfg.validate()?;
            let seed = seed.unwrap_or(cfg.seeds[0]);
            let dir = output_dir(common.out, cfg.output.as_ref()).unwrap_or_else(|| "runs".into());
            let entry = run_trial(&cfg, seed, &dir, common.format)?;
            Ok(pretty(&entry))
        }
        Command::Compare { common } => {
            let spec: CompareSpec = load(&common.config)?;
            let dir = output_dir(common.out, spec.base.output.as_ref());
            let report = run_compare(
                &spec,
                common.jobs,
                dir.as_deref().map(|d| (d, common.format)),
            )?;
            let text = pretty(&report);
            if let Some(dir) = dir {
                write_file(&dir.join("report.json"), &text)?;
            }
            Ok(text)
        }
        Command::Sweep { common } => {
            let spec: SweepSpec = load(&common.config)?;
            let dir = output_dir(common.out, spec.base.output.as_ref());
            let table = run_sweep(&spec, common.jobs)?;
            let text = pretty(&table);
            if let Some(dir) = dir {
                write_file(&dir.join("sweep.csv"), &table.to_csv())?;
                write_file(&dir.join("sweep.json"), &text)?;
            }
            Ok(text)
        }
        Command::Surface { resolution, out } => {
            let csv = surface_csv(resolution)?;
            match out {
                Some(path) => {
                    write_file(&path, &csv)?;
                    Ok(pretty(
                        &json!({ "rows": resolution * resolution, "path": path }),
                    ))
                }
                None => Ok(csv.trim_end().to_string()),
            }
        }
        Command::Analyze {
            logs,
            band,
            min_events,
            epsilon,
            out,
        } => Ok(pretty(&analyze(
            &logs,
            band,
            min_events,
            epsilon,
            out.as_deref(),
        )?)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
