//! Trial logs on disk: CSV (one row per timestep, `#` metadata line first)
//! and JSON lines (metadata object, then one object per row).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use roger_core::log::{LogRow, TrialLog};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogFormat {
    #[default]
    Csv,
    Jsonl,
}

impl LogFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Jsonl => "jsonl",
        }
    }
}

/// Column names in file order.
pub fn csv_header(log: &TrialLog) -> Vec<String> {
    let mut cols = vec!["episode".to_string(), "t".to_string()];
    cols.extend(log.state_labels.iter().cloned());
    cols.push("primary".into());
    cols.extend(log.constraint_names.iter().cloned());
    cols.push("lambda0".into());
    cols.extend(log.constraint_names.iter().map(|n| format!("lambda_{n}")));
    cols.push("delta".into());
    cols.extend(log.constraint_names.iter().map(|n| format!("rtilde_{n}")));
    cols.push("g_combined".into());
    cols
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn metadata_line(log: &TrialLog) -> String {
    let failed = log
        .failed_episodes
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "# seed={},config_hash={},tau={},window={},failed={}",
        log.seed,
        log.config_hash,
        join(&log.tau),
        log.episodes_per_window,
        failed
    )
}

pub fn write_csv<W: Write>(log: &TrialLog, mut out: W) -> Result<()> {
    let io = |e| LabError::io("<csv>", e);
    writeln!(out, "{}", metadata_line(log)).map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| LabError::parse("<csv>", e);
    w.write_record(csv_header(log)).map_err(csv_err)?;
    let mut record = Vec::new();
    for r in &log.rows {
        record.clear();
        record.push(r.episode.to_string());
        record.push(r.t.to_string());
        record.extend(r.state.iter().map(f64::to_string));
        record.push(r.primary.to_string());
        record.extend(r.penalties.iter().map(f64::to_string));
        record.push(r.lambda0.to_string());
        record.extend(r.lambda.iter().map(f64::to_string));
        record.push(r.delta.to_string());
        record.extend(r.r_tilde.iter().map(f64::to_string));
        record.push(r.g_combined.to_string());
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

fn parse_meta(line: &str, log: &mut TrialLog) -> std::result::Result<(), String> {
    let body = line
        .strip_prefix('#')
        .ok_or("missing metadata line")?
        .trim();
    for field in body.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("bad metadata field {field:?}"))?;
        let floats = |v: &str| -> std::result::Result<Vec<f64>, String> {
            v.split(';')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| format!("bad number {s:?}")))
                .collect()
        };
        match key {
            "seed" => log.seed = value.parse().map_err(|_| "bad seed")?,
            "config_hash" => log.config_hash = value.to_string(),
            "tau" => log.tau = floats(value)?,
            "window" => log.episodes_per_window = value.parse().map_err(|_| "bad window")?,
            "failed" => {
                log.failed_episodes = value
                    .split(';')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| format!("bad episode {s:?}")))
                    .collect::<std::result::Result<_, _>>()?
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(mut input: R, path: &Path) -> Result<TrialLog> {
    let bad = |m: String| LabError::parse(path, m);
    let mut first = String::new();
    input
        .read_line(&mut first)
        .map_err(|e| LabError::io(path, e))?;
    let mut log = TrialLog::default();
    parse_meta(first.trim_end(), &mut log).map_err(bad)?;

    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    };
    let primary = find("primary")?;
    let lambda0 = find("lambda0")?;
    if primary < 2 || lambda0 <= primary {
        return Err(bad("columns out of order".into()));
    }
    log.state_labels = header[2..primary].to_vec();
    log.constraint_names = header[primary + 1..lambda0].to_vec();
    let n = log.constraint_names.len();
    let s = log.state_labels.len();
    if header.len() != 2 + s + 1 + n + 1 + n + 1 + n + 1 {
        return Err(bad(format!(
            "expected {} columns, found {}",
            5 + s + 3 * n,
            header.len()
        )));
    }
    if log.tau.len() != n {
        return Err(bad(format!(
            "metadata lists {} thresholds for {n} constraints",
            log.tau.len()
        )));
    }

    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: bad number {:?}", line + 1, &record[i])))
        };
        let int = |i: usize| -> Result<usize> {
            record[i]
                .parse::<usize>()
                .map_err(|_| bad(format!("row {}: bad integer {:?}", line + 1, &record[i])))
        };
        let range = |start: usize, len: usize| -> Result<Vec<f64>> {
            (start..start + len).map(num).collect()
        };
        let mut at = 2;
        let state = range(at, s)?;
        at += s;
        let primary = num(at)?;
        let penalties = range(at + 1, n)?;
        at += 1 + n;
        let lambda0 = num(at)?;
        let lambda = range(at + 1, n)?;
        at += 1 + n;
        let delta = num(at)?;
        let r_tilde = range(at + 1, n)?;
        at += 1 + n;
        log.rows.push(LogRow {
            episode: int(0)?,
            t: int(1)?,
            state,
            primary,
            penalties,
            lambda0,
            lambda,
            delta,
            r_tilde,
            g_combined: num(at)?,
        });
    }
    Ok(log)
}

#[derive(Serialize, Deserialize)]
struct JsonlHeader {
    seed: u64,
    config_hash: String,
    tau: Vec<f64>,
    window: usize,
    state_labels: Vec<String>,
    constraint_names: Vec<String>,
    failed_episodes: Vec<usize>,
}

pub fn write_jsonl<W: Write>(log: &TrialLog, mut out: W) -> Result<()> {
    let io = |e| LabError::io("<jsonl>", e);
    let header = JsonlHeader {
        seed: log.seed,
        config_hash: log.config_hash.clone(),
        tau: log.tau.clone(),
        window: log.episodes_per_window,
        state_labels: log.state_labels.clone(),
        constraint_names: log.constraint_names.clone(),
        failed_episodes: log.failed_episodes.clone(),
    };
    let mut line = serde_json::to_string(&header).expect("header serializes");
    for r in &log.rows {
        line.push('\n');
        line.push_str(&serde_json::to_string(r).expect("row serializes"));
        if line.len() > 1 << 16 {
            out.write_all(line.as_bytes()).map_err(io)?;
            line.clear();
        }
    }
    line.push('\n');
    out.write_all(line.as_bytes()).map_err(io)?;
    out.flush().map_err(io)
}

pub fn read_jsonl<R: BufRead>(input: R, path: &Path) -> Result<TrialLog> {
    let mut lines = input.lines();
    let next =
        |lines: &mut std::io::Lines<R>| lines.next().transpose().map_err(|e| LabError::io(path, e));
    let first = next(&mut lines)?.ok_or_else(|| LabError::parse(path, "empty file"))?;
    let h: JsonlHeader = serde_json::from_str(&first).map_err(|e| LabError::parse(path, e))?;
    let mut log = TrialLog {
        seed: h.seed,
        config_hash: h.config_hash,
        state_labels: h.state_labels,
        constraint_names: h.constraint_names,
        tau: h.tau,
        episodes_per_window: h.window,
        failed_episodes: h.failed_episodes,
        ..TrialLog::default()
    };
    while let Some(line) = next(&mut lines)? {
        if !line.trim().is_empty() {
            log.rows
                .push(serde_json::from_str(&line).map_err(|e| LabError::parse(path, e))?);
        }
    }
    Ok(log)
}

pub fn write_log(log: &TrialLog, path: &Path, format: LogFormat) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let out = BufWriter::new(file);
    match format {
        LogFormat::Csv => write_csv(log, out),
        LogFormat::Jsonl => write_jsonl(log, out),
    }
    .map_err(|e| match e {
        LabError::Io { source, .. } => LabError::io(path, source),
        other => other,
    })
}

/// Reads a log in either format, telling them apart by the first byte.
pub fn read_log(path: &Path) -> Result<TrialLog> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut input = BufReader::new(file);
    let first = input
        .fill_buf()
        .map_err(|e| LabError::io(path, e))?
        .first()
        .copied();
    match first {
        Some(b'{') => read_jsonl(input, path),
        Some(b'#') => read_csv(input, path),
        _ => Err(LabError::parse(path, "not a trial log")),
    }
}

/// R₀–R₁ trajectory table: one row per checkpoint.
pub fn trajectory_csv(points: &[roger_core::analysis::Checkpoint]) -> String {
    let mut s = String::from("episode,r0,r1,cumulative_change,violated\n");
    for c in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            c.episode, c.r0, c.r1, c.cumulative_change, c.violated
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_log() -> TrialLog {
        let row = |episode, t, p: f64| LogRow {
            episode,
            t,
            state: vec![0.1 * t as f64, -2.5e-9],
            primary: 1.0 / 3.0,
            penalties: vec![p, 0.0],
            lambda0: 0.75,
            lambda: vec![0.09, 0.16],
            delta: 0.25,
            r_tilde: vec![0.15, 0.08],
            g_combined: -1e-17,
        };
        TrialLog {
            seed: 7,
            config_hash: "abc".into(),
            state_labels: vec!["x".into(), "v".into()],
            constraint_names: vec!["roll".into(), "pitch".into()],
            tau: vec![0.5, 0.2],
            episodes_per_window: 8,
            rows: vec![row(0, 0, 0.1), row(0, 1, 0.7), row(1, 0, f64::MIN_POSITIVE)],
            failed_episodes: vec![3, 9],
            params: vec![],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let log = sample_log();
        let mut bytes = Vec::new();
        write_csv(&log, &mut bytes).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "# seed=7,config_hash=abc,tau=0.5;0.2,window=8,failed=3;9"
        );
        assert_eq!(
            lines.next().unwrap(),
            "episode,t,x,v,primary,roll,pitch,lambda0,lambda_roll,lambda_pitch,delta,rtilde_roll,rtilde_pitch,g_combined"
        );
        let back = read_csv(&bytes[..], Path::new("mem")).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let log = sample_log();
        let mut bytes = Vec::new();
        write_jsonl(&log, &mut bytes).unwrap();
        assert_eq!(read_jsonl(&bytes[..], Path::new("mem")).unwrap(), log);
    }

    #[test]
    fn empty_log_has_a_header() {
        let mut log = sample_log();
        log.rows.clear();
        let mut bytes = Vec::new();
        write_csv(&log, &mut bytes).unwrap();
        assert_eq!(String::from_utf8(bytes.clone()).unwrap().lines().count(), 2);
        assert_eq!(read_csv(&bytes[..], Path::new("mem")).unwrap(), log);
    }

    #[test]
    fn malformed_input_is_reported() {
        let text = "# seed=1,config_hash=x,tau=0.5,window=8,failed=\nepisode,t,primary,c,lambda0,lambda_c,delta,rtilde_c,g_combined\n0,0,abc,0,1,0,0,0,0\n";
        let err = read_csv(text.as_bytes(), Path::new("bad.csv")).unwrap_err();
        assert!(err.to_string().contains("bad number"), "{err}");
        assert!(read_csv("episode,t\n".as_bytes(), Path::new("x")).is_err());
    }

    #[test]
    fn files_are_detected_by_content() {
        let dir = tempfile::tempdir().unwrap();
        let log = sample_log();
        for format in [LogFormat::Csv, LogFormat::Jsonl] {
            let path = dir
                .path()
                .join(format!("nested/log.{}", format.extension()));
            write_log(&log, &path, format).unwrap();
            assert_eq!(read_log(&path).unwrap(), log);
        }
    }
}
