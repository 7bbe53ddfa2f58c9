//! File formats: trajectory CSV with its sibling event JSON, dataset CSV,
//! and pretty-printed JSON reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! parsed file reproduces the original values bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use scorepath_core::kinematics::{Event, Sample, State, Trajectory};
use scorepath_core::learn::LabeledSample;
use scorepath_core::sensor::DepthScan;

use crate::CliResult;

pub const TRAJECTORY_HEADER: &str = "t,theta,d,s,F,v,omega";

/// Sibling metadata for a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event: Event,
    pub t_end: f64,
    pub dt: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let mut out = String::with_capacity(32 * (traj.samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.t, s.state.theta, s.state.d, s.state.s, s.score, s.v, s.omega
        ));
    }
    fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))
}

/// Write a trajectory CSV plus its sibling `<stem>.json` event record.
/// Returns the sibling path.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CliResult<PathBuf> {
    write_trajectory_csv(path, traj)?;
    let sibling = path.with_extension("json");
    write_json(
        &sibling,
        &EventRecord { event: traj.event, t_end: traj.t_end(), dt: traj.dt },
    )?;
    Ok(sibling)
}

fn parse_f64(field: &str, path: &Path, line: usize) -> CliResult<f64> {
    field
        .parse()
        .map_err(|e| format!("{} line {line}: {e}", path.display()))
}

/// Re-ingest a trajectory CSV and its sibling event JSON.
pub fn read_trajectory(path: &Path) -> CliResult<Trajectory> {
    let record: EventRecord = crate::config::read_json(&path.with_extension("json"))?;
    let samples = read_trajectory_samples(path)?;
    Ok(Trajectory { samples, event: record.event, dt: record.dt })
}

/// Parse just the sample rows of a trajectory CSV; the event and step size
/// come from wherever the caller recorded them.
pub fn read_trajectory_samples(path: &Path) -> CliResult<Vec<Sample>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRAJECTORY_HEADER => {}
        _ => return Err(format!("{}: missing trajectory header", path.display())),
    }
    let mut samples = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!("{} line {}: expected 7 fields", path.display(), i + 1));
        }
        let mut v = [0.0; 7];
        for (k, f) in fields.iter().enumerate() {
            v[k] = parse_f64(f, path, i + 1)?;
        }
        samples.push(Sample {
            t: v[0],
            state: State::new(v[1], v[2], v[3]),
            score: v[4],
            v: v[5],
            omega: v[6],
        });
    }
    Ok(samples)
}

/// Dataset CSV: `theta,d,label,r_0,...,r_{n-1}`.
pub fn write_dataset_csv(path: &Path, samples: &[LabeledSample]) -> CliResult<()> {
    let n_rays = samples.first().map_or(0, |s| s.scan.ranges.len());
    let mut out = String::from("theta,d,label");
    for k in 0..n_rays {
        out.push_str(&format!(",r_{k}"));
    }
    out.push('\n');
    for s in samples {
        out.push_str(&format!("{},{},{}", s.state.theta, s.state.d, s.label));
        for r in &s.scan.ranges {
            out.push_str(&format!(",{r}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn read_dataset_csv(path: &Path) -> CliResult<Vec<LabeledSample>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let n_rays = match lines.next() {
        Some((_, header)) if header.starts_with("theta,d,label") => {
            header.split(',').count() - 3
        }
        _ => return Err(format!("{}: missing dataset header", path.display())),
    };
    let mut samples = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 + n_rays {
            return Err(format!("{} line {}: expected {} fields", path.display(), i + 1, 3 + n_rays));
        }
        let theta = parse_f64(fields[0], path, i + 1)?;
        let d = parse_f64(fields[1], path, i + 1)?;
        let label: i8 = fields[2]
            .parse()
            .map_err(|e| format!("{} line {}: {e}", path.display(), i + 1))?;
        let mut ranges = Vec::with_capacity(n_rays);
        for f in &fields[3..] {
            ranges.push(parse_f64(f, path, i + 1)?);
        }
        samples.push(LabeledSample {
            state: State::planar(theta, d),
            scan: DepthScan { ranges },
            label,
        });
    }
    Ok(samples)
}

/// Resolve `--out`: a path with a `.json`/`.csv` extension is used directly,
/// anything else is treated as a directory holding `default_name`.
pub fn out_target(out: &Path, default_name: &str) -> CliResult<PathBuf> {
    let as_file = out
        .extension()
        .is_some_and(|e| e == "json" || e == "csv" || e == "svg");
    if as_file {
        if let Some(parent) = out.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
            }
        }
        Ok(out.to_path_buf())
    } else {
        fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
        Ok(out.join(default_name))
    }
}

/// Like [`out_target`] but always a directory.
pub fn out_dir(out: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    Ok(out.to_path_buf())
}
