//! Sample-based verification of the score-function conditions.
//!
//! A valid state-based score must vanish at the origin and be strictly
//! decreasing in both `theta` and `d`. The checks here are finite-difference
//! estimates on a regular grid plus the two online protocols that need no
//! state estimation (spinning in place, sweeping laterally).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kinematics::State;
use crate::score::ScoreFunction;

/// Default verification grid: 41x41 over `|theta| <= 1.2`, `|d| <= 0.9 d*`.
pub fn default_grid(d_star: f64) -> GridSpec {
    GridSpec::symmetric(1.2, 41, 0.9 * d_star, 41)
}

/// Score samples and central-difference partials on a grid. Estimates exist
/// only at interior nodes; border entries are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialField {
    pub grid: GridSpec,
    pub f: Vec<f64>,
    pub df_dtheta: Vec<f64>,
    pub df_dd: Vec<f64>,
}

impl PartialField {
    pub fn interior(&self, i: usize, j: usize) -> bool {
        i >= 1 && i + 1 < self.grid.n_theta && j >= 1 && j + 1 < self.grid.n_d
    }
}

/// Sample the score on the grid and estimate both partials by central
/// differences `(f(x+h) - f(x-h)) / 2h` at interior nodes.
pub fn estimate_partials(stbsf: &dyn ScoreFunction, grid: &GridSpec) -> Result<PartialField> {
    grid.validate()?;
    let mut f = vec![f64::NAN; grid.len()];
    for i in 0..grid.n_theta {
        for j in 0..grid.n_d {
            let (theta, d) = (grid.theta_at(i), grid.d_at(j));
            f[grid.index(i, j)] = stbsf
                .eval(&State::planar(theta, d))
                .map_err(|_| Error::EvaluationFailure { theta, d })?;
        }
    }
    let (ht, hd) = (grid.h_theta(), grid.h_d());
    let mut df_dtheta = vec![f64::NAN; grid.len()];
    let mut df_dd = vec![f64::NAN; grid.len()];
    for i in 1..grid.n_theta - 1 {
        for j in 1..grid.n_d - 1 {
            let k = grid.index(i, j);
            df_dtheta[k] = (f[grid.index(i + 1, j)] - f[grid.index(i - 1, j)]) / (2.0 * ht);
            df_dd[k] = (f[grid.index(i, j + 1)] - f[grid.index(i, j - 1)]) / (2.0 * hd);
        }
    }
    Ok(PartialField { grid: *grid, f, df_dtheta, df_dd })
}

/// Outcome of the three condition checks on a sampled field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Score at the node nearest the origin.
    pub origin_score: f64,
    pub cond_zero: bool,
    pub cond_theta: bool,
    pub cond_d: bool,
    /// Interior nodes where both partials are below `-strictness`.
    pub valid_mask: Vec<bool>,
    /// 4-connected component of the valid mask containing the origin node,
    /// as `(i, j)` indices.
    pub region: Vec<(usize, usize)>,
    /// Boundary segments of the region in `(theta, d)` coordinates, drawn
    /// on cell-edge midlines.
    pub contour: Vec<[(f64, f64); 2]>,
}

/// Check the three conditions: `|F(0,0)| <= origin_tol` and both partials
/// `< -strictness` over the connected region around the origin.
pub fn check_conditions(
    field: &PartialField,
    strictness: f64,
    origin_tol: f64,
) -> Result<ConditionReport> {
    let grid = &field.grid;
    if !grid.contains(0.0, 0.0) {
        return Err(Error::OriginOutsideGrid);
    }
    let (oi, oj) = grid.nearest(0.0, 0.0);
    let origin_score = field.f[grid.index(oi, oj)];

    let mut valid_mask = vec![false; grid.len()];
    for i in 1..grid.n_theta - 1 {
        for j in 1..grid.n_d - 1 {
            let k = grid.index(i, j);
            valid_mask[k] =
                field.df_dtheta[k] < -strictness && field.df_dd[k] < -strictness;
        }
    }

    // Flood fill from the origin node.
    let mut region = Vec::new();
    let mut in_region = vec![false; grid.len()];
    if valid_mask[grid.index(oi, oj)] {
        let mut stack = vec![(oi, oj)];
        in_region[grid.index(oi, oj)] = true;
        while let Some((i, j)) = stack.pop() {
            region.push((i, j));
            let mut push = |ni: usize, nj: usize, stack: &mut Vec<(usize, usize)>| {
                let k = grid.index(ni, nj);
                if valid_mask[k] && !in_region[k] {
                    in_region[k] = true;
                    stack.push((ni, nj));
                }
            };
            if i > 0 {
                push(i - 1, j, &mut stack);
            }
            if i + 1 < grid.n_theta {
                push(i + 1, j, &mut stack);
            }
            if j > 0 {
                push(i, j - 1, &mut stack);
            }
            if j + 1 < grid.n_d {
                push(i, j + 1, &mut stack);
            }
        }
        region.sort_unstable();
    }

    let mut contour = Vec::new();
    let (ht, hd) = (grid.h_theta(), grid.h_d());
    for &(i, j) in &region {
        let (t, d) = (grid.theta_at(i), grid.d_at(j));
        let outside = |i2: isize, j2: isize| {
            i2 < 0
                || j2 < 0
                || i2 >= grid.n_theta as isize
                || j2 >= grid.n_d as isize
                || !in_region[grid.index(i2 as usize, j2 as usize)]
        };
        // One segment per exposed cell edge, at half-spacing from the node.
        if outside(i as isize - 1, j as isize) {
            contour.push([(t - ht / 2.0, d - hd / 2.0), (t - ht / 2.0, d + hd / 2.0)]);
        }
        if outside(i as isize + 1, j as isize) {
            contour.push([(t + ht / 2.0, d - hd / 2.0), (t + ht / 2.0, d + hd / 2.0)]);
        }
        if outside(i as isize, j as isize - 1) {
            contour.push([(t - ht / 2.0, d - hd / 2.0), (t + ht / 2.0, d - hd / 2.0)]);
        }
        if outside(i as isize, j as isize + 1) {
            contour.push([(t - ht / 2.0, d + hd / 2.0), (t + ht / 2.0, d + hd / 2.0)]);
        }
    }

    let nonempty = !region.is_empty();
    Ok(ConditionReport {
        origin_score,
        cond_zero: origin_score.abs() <= origin_tol,
        cond_theta: nonempty
            && region.iter().all(|&(i, j)| field.df_dtheta[grid.index(i, j)] < -strictness),
        cond_d: nonempty
            && region.iter().all(|&(i, j)| field.df_dd[grid.index(i, j)] < -strictness),
        valid_mask,
        region,
        contour,
    })
}

/// Motion protocols that check monotonicity without state estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OnlineProtocol {
    /// Sweep theta over `[-half_width, +half_width]` at a fixed d.
    SpinInPlace { half_width: f64 },
    /// Sweep d over `[-half_width, +half_width]` at a fixed theta.
    LateralSweep { half_width: f64 },
}

/// Verdict of an online monotonicity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineVerdict {
    pub strictly_decreasing: bool,
    /// First adjacent pair `((coord, score), (coord, score))` violating
    /// strict decrease, if any.
    pub violation: Option<((f64, f64), (f64, f64))>,
}

/// Sweep one coordinate and require strictly decreasing scores.
pub fn online_check(
    stbsf: &dyn ScoreFunction,
    protocol: OnlineProtocol,
    at: f64,
    n: usize,
) -> Result<OnlineVerdict> {
    if n < 2 {
        return Err(Error::InvalidConfig("online check needs at least 2 samples"));
    }
    if let OnlineProtocol::LateralSweep { .. } = protocol {
        if (at.abs() - core::f64::consts::FRAC_PI_2).abs() < 1e-12 {
            return Err(Error::InconclusiveProtocol);
        }
    }
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..n {
        let (coord, state) = match protocol {
            OnlineProtocol::SpinInPlace { half_width } => {
                let theta = -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64;
                (theta, State::planar(theta, at))
            }
            OnlineProtocol::LateralSweep { half_width } => {
                let d = -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64;
                (d, State::planar(at, d))
            }
        };
        let score = stbsf.eval(&state)?;
        if let Some((pc, ps)) = prev {
            if score >= ps {
                return Ok(OnlineVerdict {
                    strictly_decreasing: false,
                    violation: Some(((pc, ps), (coord, score))),
                });
            }
        }
        prev = Some((coord, score));
    }
    Ok(OnlineVerdict { strictly_decreasing: true, violation: None })
}
