//! Subcommand implementations.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use scorepath_core::analysis::{
    build_certificate, slope_bounds, solve_implicit_curve, ConePair, ImplicitCurve,
    SlopeBounds, StabilityCertificate,
};
use scorepath_core::experiments::{run_sweep, RatioSummary, TrajectoryMetrics};
use scorepath_core::kinematics::{simulate, ControllerParams, Event, State};
use scorepath_core::learn::{generate_dataset, train_linear_svm};
use scorepath_core::score::ScoreFunction;
use scorepath_core::sensor::render_depth;
use scorepath_core::verify::{check_conditions, default_grid, estimate_partials, ConditionReport};

use crate::config::{
    resolve_score, CertifyCliConfig, CurveCliConfig, DatasetConfig, RenderConfig,
    SimulateConfig, SweepCliConfig, TrainConfig, VerifyCliConfig,
};
use crate::io::{
    out_dir, out_target, write_dataset_csv, write_json, write_trajectory,
};
use crate::{io, svg, CliResult};

pub fn cmd_render(cfg: &RenderConfig, out: &Path) -> CliResult<()> {
    cfg.sensor.validate().map_err(|e| e.to_string())?;
    let path = out_target(out, "scans.csv")?;
    let mut text = String::from("theta,d");
    for k in 0..cfg.sensor.n_rays {
        text.push_str(&format!(",r_{k}"));
    }
    text.push('\n');
    for &(theta, d) in &cfg.poses {
        let scan = render_depth(&cfg.corridor, &cfg.sensor, &State::planar(theta, d), cfg.seed)
            .map_err(|e| e.to_string())?;
        text.push_str(&format!("{theta},{d}"));
        for r in &scan.ranges {
            text.push_str(&format!(",{r}"));
        }
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_dataset(cfg: &DatasetConfig, out: &Path) -> CliResult<()> {
    let grid = cfg.effective_grid();
    let samples = generate_dataset(
        &cfg.corridor,
        &cfg.sensor,
        &grid,
        cfg.exclusion_margin,
        &cfg.scales,
        cfg.seed,
    )
    .map_err(|e| e.to_string())?;
    let path = out_target(out, "dataset.csv")?;
    write_dataset_csv(&path, &samples)?;
    println!("wrote {} ({} samples)", path.display(), samples.len());
    Ok(())
}

#[derive(Serialize)]
struct TrainReport {
    train_accuracy: f64,
    n_samples: usize,
    reg_lambda: f64,
    epochs: usize,
    seed: u64,
}

pub fn cmd_train(cfg: &TrainConfig, out: &Path) -> CliResult<()> {
    let samples = match &cfg.dataset {
        Some(path) => io::read_dataset_csv(path)?,
        None => {
            let grid = cfg.data.effective_grid();
            generate_dataset(
                &cfg.data.corridor,
                &cfg.data.sensor,
                &grid,
                cfg.data.exclusion_margin,
                &cfg.data.scales,
                cfg.data.seed,
            )
            .map_err(|e| e.to_string())?
        }
    };
    let outcome =
        train_linear_svm(&samples, &cfg.hyper, &cfg.data.sensor).map_err(|e| e.to_string())?;
    let model_path = out_target(out, "model.json")?;
    write_json(&model_path, &outcome.model)?;
    println!(
        "wrote {} (train accuracy {:.4})",
        model_path.display(),
        outcome.train_accuracy
    );
    // A directory target also gets the training report.
    if model_path != *out {
        let report_path = out.join("train_report.json");
        write_json(
            &report_path,
            &TrainReport {
                train_accuracy: outcome.train_accuracy,
                n_samples: samples.len(),
                reg_lambda: cfg.hyper.reg_lambda,
                epochs: cfg.hyper.epochs,
                seed: cfg.hyper.seed,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    strictness: f64,
    origin_tol: f64,
    median_abs_score: f64,
    n_region: usize,
    #[serde(flatten)]
    report: ConditionReport,
}

pub fn cmd_verify(cfg: &VerifyCliConfig, out: &Path) -> CliResult<()> {
    let score = resolve_score(&cfg.score, &cfg.corridor, &cfg.sensor)?;
    let grid = cfg.grid.unwrap_or_else(|| default_grid(cfg.d_star));
    let field = estimate_partials(score.as_ref(), &grid).map_err(|e| e.to_string())?;
    let mut abs_scores: Vec<f64> = field.f.iter().map(|f| f.abs()).collect();
    abs_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = abs_scores[abs_scores.len() / 2];
    let origin_tol = cfg.origin_tol.unwrap_or(0.1 * median);
    let report =
        check_conditions(&field, cfg.strictness, origin_tol).map_err(|e| e.to_string())?;
    let dir = out_dir(out)?;
    let report_path = dir.join("report.json");
    write_json(
        &report_path,
        &VerifyReport {
            strictness: cfg.strictness,
            origin_tol,
            median_abs_score: median,
            n_region: report.region.len(),
            report: report.clone(),
        },
    )?;
    let svg_path = dir.join("partials.svg");
    std::fs::write(&svg_path, svg::partials_heatmap(&field, &report))
        .map_err(|e| format!("{}: {e}", svg_path.display()))?;
    println!(
        "wrote {} (region {} nodes, flags {}/{}/{})",
        report_path.display(),
        report.region.len(),
        report.cond_zero,
        report.cond_theta,
        report.cond_d
    );
    Ok(())
}

#[derive(Serialize)]
struct CurveReport {
    curve: ImplicitCurve,
    bounds: SlopeBounds,
}

pub fn cmd_curve(cfg: &CurveCliConfig, out: &Path) -> CliResult<()> {
    let score = resolve_score(&cfg.score, &cfg.corridor, &cfg.sensor)?;
    let grid: Vec<f64> = (0..cfg.n_samples)
        .map(|k| -cfg.theta_lim + 2.0 * cfg.theta_lim * k as f64 / (cfg.n_samples - 1) as f64)
        .collect();
    let curve = solve_implicit_curve(score.as_ref(), &grid, cfg.tol, cfg.d_star)
        .map_err(|e| e.to_string())?;
    let inf_slope = curve.slopes.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()));
    let bounds =
        slope_bounds(&curve, cfg.margin_frac * inf_slope).map_err(|e| e.to_string())?;
    let path = out_target(out, "curve.json")?;
    write_json(&path, &CurveReport { curve, bounds })?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct CertificateFile {
    params: ControllerParams,
    config: scorepath_core::analysis::CertifyConfig,
    /// Absent when the certificate construction itself fails (e.g. a
    /// learned score whose zero curve misses the origin).
    certificate: Option<StabilityCertificate>,
    error: Option<String>,
}

pub fn cmd_certify(cfg: &CertifyCliConfig, out: &Path) -> CliResult<()> {
    let score = resolve_score(&cfg.score, &cfg.corridor, &cfg.sensor)?;
    let params = cfg.params()?;
    let path = out_target(out, "certificate.json")?;
    // Construction failures are themselves a certification result: record
    // them in the output instead of aborting.
    let (certificate, error) = match build_certificate(score.as_ref(), &params, &cfg.certify) {
        Ok(cert) => (Some(cert), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let line = match &certificate {
        Some(c) => format!(
            "verdict {}, ratio {} vs admissible {}",
            c.verdict, c.ratio, c.admissible_ratio
        ),
        None => format!("not certifiable: {}", error.as_deref().unwrap_or("")),
    };
    write_json(&path, &CertificateFile { params, config: cfg.certify, certificate, error })?;
    println!("wrote {} ({line})", path.display());
    Ok(())
}

pub fn cmd_simulate(cfg: &SimulateConfig, out: &Path) -> CliResult<()> {
    let score = resolve_score(&cfg.score, &cfg.corridor, &cfg.sensor)?;
    let params = ControllerParams::new(cfg.alpha, cfg.beta, cfg.gamma).map_err(|e| e.to_string())?;
    let traj = simulate(&State::planar(cfg.theta0, cfg.d0), score.as_ref(), &params, &cfg.sim)
        .map_err(|e| e.to_string())?;
    let path = out_target(out, "trajectory.csv")?;
    write_trajectory(&path, &traj)?;
    println!(
        "wrote {} ({:?} at t={})",
        path.display(),
        traj.event,
        traj.t_end()
    );
    Ok(())
}

#[derive(Serialize)]
struct RunSummary {
    ratio: f64,
    ic_index: usize,
    theta0: f64,
    d0: f64,
    csv: Option<String>,
    event: Option<Event>,
    t_end: Option<f64>,
    metrics: Option<TrajectoryMetrics>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    n_runs: usize,
    elapsed_s: f64,
    summaries: Vec<RatioSummary>,
    runs: Vec<RunSummary>,
}

/// Overlay for the state-space plot; skipped when the score's zero curve or
/// slope bounds cannot be constructed.
fn cone_overlay(score: &dyn ScoreFunction, d_star: f64) -> Option<(ConePair, ImplicitCurve)> {
    let grid: Vec<f64> = (0..241).map(|k| -1.2 + 2.4 * k as f64 / 240.0).collect();
    let curve = solve_implicit_curve(score, &grid, 1e-9, d_star).ok()?;
    let inf_slope = curve.slopes.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()));
    let bounds = slope_bounds(&curve, 0.1 * inf_slope).ok()?;
    let cones = ConePair::new(&bounds, d_star).ok()?;
    Some((cones, curve))
}

pub fn cmd_sweep(cfg: &SweepCliConfig, out: &Path) -> CliResult<()> {
    let dir = out_dir(out)?;
    let summary_path = dir.join("summary.json");
    if cfg.sweep.ratios.is_empty() || cfg.sweep.ic_grid.is_empty() {
        write_json(
            &summary_path,
            &SweepSummary { n_runs: 0, elapsed_s: 0.0, summaries: vec![], runs: vec![] },
        )?;
        println!("wrote {} (empty sweep)", summary_path.display());
        return Ok(());
    }
    let score = resolve_score(&cfg.score, &cfg.corridor, &cfg.sensor)?;
    let start = Instant::now();
    let result = run_sweep(&cfg.sweep, score.as_ref()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut runs = Vec::with_capacity(result.runs.len());
    for run in &result.runs {
        let ratio_idx = cfg
            .sweep
            .ratios
            .iter()
            .position(|&r| r == run.ratio)
            .unwrap_or(0);
        let csv = run.trajectory.as_ref().map(|traj| {
            let name = format!("traj_{ratio_idx:02}_{:02}.csv", run.ic_index);
            (name, traj)
        });
        let csv_name = match csv {
            Some((name, traj)) => {
                // Sweep events live in the summary, not sibling files.
                io::write_trajectory_csv(&dir.join(&name), traj)?;
                Some(name)
            }
            None => None,
        };
        runs.push(RunSummary {
            ratio: run.ratio,
            ic_index: run.ic_index,
            theta0: run.theta0,
            d0: run.d0,
            csv: csv_name,
            event: run.trajectory.as_ref().map(|t| t.event),
            t_end: run.trajectory.as_ref().map(|t| t.t_end()),
            metrics: run.metrics,
            error: run.error.clone(),
        });
    }
    write_json(
        &summary_path,
        &SweepSummary {
            n_runs: result.runs.len(),
            elapsed_s: elapsed,
            summaries: result.summaries.clone(),
            runs,
        },
    )?;

    let overlay = cone_overlay(score.as_ref(), cfg.sweep.sim.d_star);
    let state_svg = svg::state_space(
        &result,
        overlay.as_ref().map(|(c, k)| (c, k)),
        cfg.sweep.sim.d_star,
    );
    std::fs::write(dir.join("state_space.svg"), state_svg)
        .map_err(|e| format!("state_space.svg: {e}"))?;
    let top_svg = svg::topdown(&result, cfg.corridor.w_half());
    std::fs::write(dir.join("topdown.svg"), top_svg).map_err(|e| format!("topdown.svg: {e}"))?;

    for s in &result.summaries {
        println!(
            "ratio {:>6}: {}/{} converged, {} crashed, mean settling {:.2}s, mean max|d| {:.3}",
            s.ratio, s.n_converged, s.n_runs, s.n_crashed, s.mean_settling_time, s.mean_max_abs_d
        );
    }
    println!("wrote {}", summary_path.display());
    Ok(())
}
