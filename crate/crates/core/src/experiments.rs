//! Batch experiment harness: ratio sweeps, trajectory metrics, and the
//! bang-bang line-follower baseline.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    simulate, ControllerParams, Controller, Event, SimConfig, State, Trajectory,
};
use crate::score::ScoreFunction;

/// Nine standard initial conditions: the off-origin nodes of
/// `{-0.6, 0, 0.6} x {-0.8, 0, 0.8} d_star` plus one asymmetric pose.
pub fn default_ic_grid(d_star: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(9);
    for &theta in &[-0.6, 0.0, 0.6] {
        for &frac in &[-0.8, 0.0, 0.8] {
            if theta == 0.0 && frac == 0.0 {
                continue;
            }
            out.push((theta, frac * d_star));
        }
    }
    out.push((0.3, -0.4 * d_star));
    out
}

/// Bang-bang baseline: fixed forward speed, fixed-magnitude turn rate
/// outside a score deadband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BangBangParams {
    /// Turn rate magnitude (rad/s).
    pub gamma: f64,
    /// Forward speed (m/s).
    pub beta: f64,
    /// Score half-width where the turn rate is zero (>= 0).
    pub deadband: f64,
}

impl BangBangParams {
    pub fn new(gamma: f64, beta: f64, deadband: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(beta > 0.0) || !(deadband >= 0.0) {
            return Err(Error::InvalidConfig(
                "bang-bang needs gamma > 0, beta > 0, deadband >= 0",
            ));
        }
        Ok(BangBangParams { gamma, beta, deadband })
    }
}

/// `omega = gamma sign(F)` outside the deadband, else 0; `v = beta` always.
/// The turn direction matches the smooth law `omega = gamma F`.
#[derive(Debug, Clone, Copy)]
pub struct BangBangController(pub BangBangParams);

impl Controller for BangBangController {
    fn control(&self, score: f64) -> (f64, f64) {
        let p = &self.0;
        let omega = if score.abs() <= p.deadband {
            0.0
        } else if score > 0.0 {
            p.gamma
        } else {
            -p.gamma
        };
        (p.beta, omega)
    }
}

/// Scalar outcomes of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub event: Event,
    pub crashed: bool,
    /// Time the final convergence dwell began; present iff converged.
    pub settling_time: Option<f64>,
    pub max_abs_d: f64,
    /// Sign changes of `d` after the first local minimum of `|d|`.
    pub overshoot_count: usize,
    /// `|F|` at the last sample.
    pub final_score: f64,
}

/// Reduce a trajectory to its metrics.
pub fn compute_metrics(traj: &Trajectory, cfg: &SimConfig) -> Result<TrajectoryMetrics> {
    if traj.samples.is_empty() {
        return Err(Error::InvalidConfig("metrics need a nonempty trajectory"));
    }
    let d: Vec<f64> = traj.samples.iter().map(|s| s.state.d).collect();
    let max_abs_d = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    // First local minimum of |d|: scan while |d| is non-increasing.
    let mut i_min = 0;
    while i_min + 1 < d.len() && d[i_min + 1].abs() <= d[i_min].abs() {
        i_min += 1;
    }
    let overshoot_count = d[i_min..]
        .windows(2)
        .filter(|w| w[0] * w[1] < 0.0)
        .count();

    let settling_time = if traj.event == Event::Converged {
        Some((traj.t_end() - cfg.dwell).max(0.0))
    } else {
        None
    };
    Ok(TrajectoryMetrics {
        event: traj.event,
        crashed: traj.event == Event::Crashed,
        settling_time,
        max_abs_d,
        overshoot_count,
        final_score: traj.samples.last().unwrap().score.abs(),
    })
}

/// Sweep configuration: a set of `beta/gamma` ratios run over a grid of
/// initial conditions with a shared score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    pub gamma: f64,
    pub alpha: f64,
    pub ic_grid: Vec<(f64, f64)>,
    pub sim: SimConfig,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        SweepConfig {
            ratios: alloc::vec![0.2, 2.0, 20.0],
            gamma: 1.0,
            alpha: 5e-5,
            ic_grid: default_ic_grid(sim.d_star),
            sim,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidConfig("sweep ratios must be positive"));
        }
        if !(self.gamma > 0.0) || !(self.alpha >= 0.0) {
            return Err(Error::InvalidConfig("sweep needs gamma > 0 and alpha >= 0"));
        }
        for &(theta, d) in &self.ic_grid {
            if theta.abs() >= FRAC_PI_2 || d.abs() >= self.sim.d_star {
                return Err(Error::InvalidConfig("initial condition outside admissible region"));
            }
        }
        Ok(())
    }
}

/// One (ratio, initial condition) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub ratio: f64,
    pub ic_index: usize,
    pub theta0: f64,
    pub d0: f64,
    pub trajectory: Option<Trajectory>,
    pub metrics: Option<TrajectoryMetrics>,
    /// Failure description when simulation or metrics errored.
    pub error: Option<String>,
}

/// Per-ratio aggregate. Non-converged runs count their settling time as the
/// simulation horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub ratio: f64,
    pub n_runs: usize,
    pub n_converged: usize,
    pub n_crashed: usize,
    pub mean_settling_time: f64,
    pub mean_max_abs_d: f64,
    pub total_overshoots: usize,
}

/// All runs plus per-ratio summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub runs: Vec<RunRecord>,
    /// Ordered by mean settling time, fastest first.
    pub summaries: Vec<RatioSummary>,
}

/// Run every (ratio, initial condition) pair. Per-run failures are recorded
/// in the result and never abort the sweep. Runs are ordered by
/// (ratio index, initial-condition index).
pub fn run_sweep(cfg: &SweepConfig, stbsf: &dyn ScoreFunction) -> Result<SweepResult> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.ratios.len() * cfg.ic_grid.len());
    for &ratio in &cfg.ratios {
        for (ic_index, &(theta0, d0)) in cfg.ic_grid.iter().enumerate() {
            let params = ControllerParams::new(cfg.alpha, ratio * cfg.gamma, cfg.gamma)?;
            let run = match simulate(&State::planar(theta0, d0), stbsf, &params, &cfg.sim)
                .and_then(|traj| {
                    let metrics = compute_metrics(&traj, &cfg.sim)?;
                    Ok((traj, metrics))
                }) {
                Ok((traj, metrics)) => RunRecord {
                    ratio,
                    ic_index,
                    theta0,
                    d0,
                    trajectory: Some(traj),
                    metrics: Some(metrics),
                    error: None,
                },
                Err(e) => RunRecord {
                    ratio,
                    ic_index,
                    theta0,
                    d0,
                    trajectory: None,
                    metrics: None,
                    error: Some(e.to_string()),
                },
            };
            runs.push(run);
        }
    }

    let mut summaries: Vec<RatioSummary> = cfg
        .ratios
        .iter()
        .map(|&ratio| summarize(ratio, &runs, cfg.sim.t_max))
        .collect();
    summaries.sort_by(|a, b| {
        a.mean_settling_time
            .partial_cmp(&b.mean_settling_time)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(SweepResult { runs, summaries })
}

fn summarize(ratio: f64, runs: &[RunRecord], t_max: f64) -> RatioSummary {
    let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.ratio == ratio).collect();
    let n_runs = mine.len();
    let mut n_converged = 0;
    let mut n_crashed = 0;
    let mut settle_sum = 0.0;
    let mut max_d_sum = 0.0;
    let mut total_overshoots = 0;
    for r in &mine {
        match &r.metrics {
            Some(m) => {
                if m.crashed {
                    n_crashed += 1;
                }
                match m.settling_time {
                    Some(t) => {
                        n_converged += 1;
                        settle_sum += t;
                    }
                    None => settle_sum += t_max,
                }
                max_d_sum += m.max_abs_d;
                total_overshoots += m.overshoot_count;
            }
            None => settle_sum += t_max,
        }
    }
    RatioSummary {
        ratio,
        n_runs,
        n_converged,
        n_crashed,
        mean_settling_time: settle_sum / n_runs.max(1) as f64,
        mean_max_abs_d: max_d_sum / n_runs.max(1) as f64,
        total_overshoots,
    }
}
