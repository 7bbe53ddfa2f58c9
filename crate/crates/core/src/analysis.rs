//! Constructive stability analysis for the smooth closed loop.
//!
//! From a valid score the module extracts the zero curve `h`, bounds its
//! slope, builds the invariant cone pair around it, computes the admissible
//! `beta/gamma` ratio (closed-form limit plus a sampled line bound), and
//! assembles a sampled certificate: inward flux on all six cone boundary
//! segments, Lyapunov decrease in the cone interiors, and finite-time entry
//! from a grid of initial conditions.

use alloc::vec::Vec;

use libm::{exp, sin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    simulate, ControllerParams, Event, SimConfig, State, DEFAULT_D_STAR,
};
use crate::score::ScoreFunction;

/// Step for fallback central-difference partials.
const FD_STEP: f64 = 1e-5;

/// `(dF/dtheta, dF/dd)` at a state: exact when the score provides partials,
/// central differences otherwise.
pub fn partials_at(stbsf: &dyn ScoreFunction, state: &State) -> Result<(f64, f64)> {
    if let Some(p) = stbsf.partials(state) {
        return Ok(p);
    }
    let at = |theta: f64, d: f64| stbsf.eval(&State::planar(theta, d));
    let ft = (at(state.theta + FD_STEP, state.d)? - at(state.theta - FD_STEP, state.d)?)
        / (2.0 * FD_STEP);
    let fd = (at(state.theta, state.d + FD_STEP)? - at(state.theta, state.d - FD_STEP)?)
        / (2.0 * FD_STEP);
    Ok((ft, fd))
}

/// `n` values log-spaced in magnitude from `lo` to `hi` (both positive).
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (libm::log(lo), libm::log(hi));
    (0..n)
        .map(|k| exp(llo + (lhi - llo) * k as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// Sampled zero curve `d = h(theta)` of a score, with slopes
/// `h'(theta) = -(dF/dtheta)/(dF/dd)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitCurve {
    pub theta_samples: Vec<f64>,
    pub d_values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Retained theta interval.
    pub domain: (f64, f64),
}

impl ImplicitCurve {
    pub fn len(&self) -> usize {
        self.theta_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_samples.is_empty()
    }
}

/// Root-find `F(theta, d) = 0` in `|d| <= d_star` at each grid heading by
/// bisection to `|F| <= tol`. Headings where the root leaves the band are
/// dropped, shrinking the domain.
pub fn solve_implicit_curve(
    stbsf: &dyn ScoreFunction,
    theta_grid: &[f64],
    tol: f64,
    d_star: f64,
) -> Result<ImplicitCurve> {
    if !(tol > 0.0) || !(d_star > 0.0) {
        return Err(Error::InvalidConfig("curve solver needs tol > 0 and d_star > 0"));
    }
    let mut theta_samples = Vec::new();
    let mut d_values = Vec::new();
    let mut slopes = Vec::new();
    for &theta in theta_grid {
        let at = |d: f64| stbsf.eval(&State::planar(theta, d));
        let (mut lo, mut hi) = (-d_star, d_star);
        let (f_lo, f_hi) = (at(lo)?, at(hi)?);
        // F decreases in d, so a root needs F(-d_star) >= 0 >= F(+d_star).
        if f_lo < 0.0 || f_hi > 0.0 {
            continue;
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let f_mid = at(mid)?;
            if f_mid.abs() <= tol {
                break;
            }
            if f_mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ft, fd) = partials_at(stbsf, &State::planar(theta, mid))?;
        theta_samples.push(theta);
        d_values.push(mid);
        slopes.push(-ft / fd);
    }
    let domain = match (theta_samples.first(), theta_samples.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 0.0),
    };
    Ok(ImplicitCurve { theta_samples, d_values, slopes, domain })
}

/// Slope envelope of an implicit curve with a safety margin on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeBounds {
    /// `sup |h'|` over the domain.
    pub sup_slope: f64,
    /// `inf |h'|` over the domain.
    pub inf_slope: f64,
    pub margin: f64,
    /// `inf |h'| - margin`; the shallow cone line.
    pub l_inner: f64,
    /// `sup |h'| + margin`; the steep cone line.
    pub l_outer: f64,
}

/// Default margin: a tenth of the smallest slope magnitude.
pub const DEFAULT_MARGIN_FRAC: f64 = 0.1;

/// Bound `|h'|` over the curve and widen by `margin`. The chord property
/// `l_inner |theta| <= |h| <= l_outer |theta|` is re-verified at every
/// sample.
pub fn slope_bounds(curve: &ImplicitCurve, margin: f64) -> Result<SlopeBounds> {
    if curve.is_empty() {
        return Err(Error::InvalidConfig("slope bounds need a nonempty curve"));
    }
    if !(margin > 0.0) {
        return Err(Error::InvalidConfig("slope margin must be > 0"));
    }
    let mut inf_slope = f64::INFINITY;
    let mut sup_slope = 0.0_f64;
    for &s in &curve.slopes {
        if !(s < 0.0) || !s.is_finite() {
            return Err(Error::InvalidConfig("curve slopes must be finite and negative"));
        }
        inf_slope = inf_slope.min(s.abs());
        sup_slope = sup_slope.max(s.abs());
    }
    if inf_slope <= margin {
        return Err(Error::DegenerateSlopes { inf_slope, margin });
    }
    let bounds = SlopeBounds {
        sup_slope,
        inf_slope,
        margin,
        l_inner: inf_slope - margin,
        l_outer: sup_slope + margin,
    };
    for (&theta, &d) in curve.theta_samples.iter().zip(&curve.d_values) {
        let (lo, hi) = (bounds.l_inner * theta.abs(), bounds.l_outer * theta.abs());
        // Root tolerance leaks into d; accept chord slack of the same order.
        if d.abs() < lo - 1e-6 || d.abs() > hi + 1e-6 {
            return Err(Error::InvalidConfig("chord containment violated on curve"));
        }
    }
    Ok(bounds)
}

/// Boundary-flux limit `Delta = L (L dF/dd(0) - dF/dtheta(0))` along the
/// line `d = -L theta`; positive exactly when `L < |h'(0)|`.
pub fn compute_delta(stbsf: &dyn ScoreFunction, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::InvalidConfig("delta needs a positive slope"));
    }
    let (ft, fd) = partials_at(stbsf, &State::planar(0.0, 0.0))?;
    let delta = l * (l * fd - ft);
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta { delta });
    }
    Ok(delta)
}

/// Sampled infimum of the line-restricted ratio
/// `L F_L(theta) e^(alpha F_L^2) / (-sin theta)` with `F_L(theta) =
/// F(theta, -L theta)`. The `theta -> 0` limit is `compute_delta`; callers
/// combine both.
pub fn numeric_ratio_bound(
    stbsf: &dyn ScoreFunction,
    alpha: f64,
    l: f64,
    theta_samples: &[f64],
) -> Result<f64> {
    let mut min_ratio = f64::INFINITY;
    for &theta in theta_samples {
        if theta == 0.0 {
            return Err(Error::InvalidConfig("ratio samples must exclude theta = 0"));
        }
        let f_l = stbsf.eval(&State::planar(theta, -l * theta))?;
        let ratio = l * f_l * exp(alpha * f_l * f_l) / (-sin(theta));
        if !(ratio > 0.0) {
            return Err(Error::NegativeRatioSample { theta, ratio });
        }
        min_ratio = min_ratio.min(ratio);
    }
    if !min_ratio.is_finite() {
        return Err(Error::InvalidConfig("ratio bound needs at least one sample"));
    }
    Ok(min_ratio)
}

/// The invariant region: two cones between the lines `d = -l_inner theta`
/// and `d = -l_outer theta` (K1 for theta <= 0, K2 for theta >= 0), capped
/// at `|d| <= d_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePair {
    pub l_inner: f64,
    pub l_outer: f64,
    pub d_star: f64,
}

impl ConePair {
    pub fn new(bounds: &SlopeBounds, d_star: f64) -> Result<Self> {
        if !(d_star > 0.0) {
            return Err(Error::InvalidConfig("cone pair needs d_star > 0"));
        }
        Ok(ConePair { l_inner: bounds.l_inner, l_outer: bounds.l_outer, d_star })
    }

    /// Signed distance-like membership slack: nonnegative iff the state is
    /// in the cone pair. Continuous across the origin, where it is 0.
    pub fn membership_slack(&self, theta: f64, d: f64) -> f64 {
        let (a, b) = (-self.l_inner * theta, -self.l_outer * theta);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        (d - lo).min(hi - d).min(self.d_star - d.abs())
    }

    pub fn contains(&self, theta: f64, d: f64) -> bool {
        self.membership_slack(theta, d) >= 0.0
    }

    /// Largest `|theta|` the cone reaches: where the shallow line hits the
    /// cap, clamped inside the admissible heading range.
    pub fn theta_extent(&self) -> f64 {
        (self.d_star / self.l_inner).min(0.999 * core::f64::consts::FRAC_PI_2)
    }
}

/// One of the three boundary pieces of each cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment {
    /// Shallow line `d = -l_inner theta` (carries the binding constraint).
    InnerLine,
    /// Steep line `d = -l_outer theta`.
    OuterLine,
    /// Cap `|d| = d_star`.
    Cap,
}

/// Inward-flux evaluation at one boundary sample. `value >= 0` means the
/// vector field does not exit through this point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub segment: Segment,
    pub theta: f64,
    pub d: f64,
    pub value: f64,
    pub pass: bool,
}

/// Boundary portion of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub checks: Vec<BoundaryCheck>,
    pub pass: bool,
}

/// Flux tolerance: boundary values may be this far below zero.
pub const DEFAULT_FLUX_TOL: f64 = 1e-9;

fn closed_loop_planar(
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
    theta: f64,
    d: f64,
) -> Result<(f64, f64)> {
    let f = stbsf.eval(&State::planar(theta, d))?;
    let dtheta = params.gamma * f;
    let dd = params.beta * exp(-params.alpha * f * f) * sin(theta);
    Ok((dtheta, dd))
}

/// Sample the inward-flux inequality on all six cone boundary segments:
/// `n_boundary` points per segment, log-spaced in `|theta|` toward 0 on the
/// lines (the binding region), linearly spaced along the caps.
pub fn certify_invariance(
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
    cones: &ConePair,
    n_boundary: usize,
) -> Result<BoundaryReport> {
    if n_boundary < 2 {
        return Err(Error::InvalidConfig("boundary certification needs >= 2 samples"));
    }
    let theta_max = cones.theta_extent();
    let mut checks = Vec::new();
    for sign in [-1.0, 1.0] {
        for segment in [Segment::InnerLine, Segment::OuterLine, Segment::Cap] {
            let thetas: Vec<f64> = match segment {
                Segment::InnerLine => log_spaced(1e-4, theta_max, n_boundary)
                    .into_iter()
                    .map(|t| sign * t)
                    .collect(),
                // The outer line ends where it meets the cap.
                Segment::OuterLine => {
                    log_spaced(1e-4, (cones.d_star / cones.l_outer).min(theta_max), n_boundary)
                        .into_iter()
                        .map(|t| sign * t)
                        .collect()
                }
                Segment::Cap => {
                    // Cap spans between the two line-cap intersections.
                    let lo = cones.d_star / cones.l_outer;
                    let hi = theta_max;
                    (0..n_boundary)
                        .map(|k| {
                            sign * (lo + (hi - lo) * k as f64 / (n_boundary - 1) as f64)
                        })
                        .collect()
                }
            };
            for theta in thetas {
                let d = match segment {
                    Segment::InnerLine => -cones.l_inner * theta,
                    Segment::OuterLine => -cones.l_outer * theta,
                    Segment::Cap => -theta.signum() * cones.d_star,
                };
                let (dtheta, dd) = closed_loop_planar(stbsf, params, theta, d)?;
                let value = match segment {
                    // Exit through d = -L theta means (d + L theta) growing
                    // away from the cone; the non-exit direction flips with
                    // the cone (sign of theta) and the side of the curve.
                    Segment::InnerLine => -theta.signum() * (cones.l_inner * dtheta + dd),
                    Segment::OuterLine => theta.signum() * (cones.l_outer * dtheta + dd),
                    // On the cap, |d| must be non-increasing.
                    Segment::Cap => -d * dd / cones.d_star,
                };
                checks.push(BoundaryCheck {
                    segment,
                    theta,
                    d,
                    value,
                    pass: value >= -DEFAULT_FLUX_TOL,
                });
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(BoundaryReport { checks, pass })
}

/// Lyapunov decrease at one sampled cone-interior state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCheck {
    pub theta: f64,
    pub d: f64,
    pub vdot: f64,
    pub pass: bool,
}

/// Lyapunov portion of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub checks: Vec<LyapunovCheck>,
    pub pass: bool,
}

/// Origin exclusion radius for Lyapunov sampling (`Vdot = 0` exactly there).
pub const LYAPUNOV_EXCLUSION_RADIUS: f64 = 1e-3;

/// Evaluate `Vdot = d beta e^(-alpha F^2) sin(theta)` for `V = d^2/2` at
/// `n_interior` seeded cone-interior samples outside the origin ball.
pub fn certify_lyapunov(
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
    cones: &ConePair,
    n_interior: usize,
    seed: u64,
) -> Result<LyapunovReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta_max = cones.theta_extent();
    let mut checks = Vec::with_capacity(n_interior);
    let mut guard = 0usize;
    while checks.len() < n_interior {
        guard += 1;
        if guard > 100 * n_interior {
            return Err(Error::InvalidConfig("cone interior sampling failed to fill"));
        }
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let theta = sign * theta_max * rng.random::<f64>();
        // Strictly between the two lines.
        let lam: f64 = rng.random();
        let l = cones.l_inner + (cones.l_outer - cones.l_inner) * lam;
        let d = -l * theta;
        if d.abs() >= cones.d_star || sqrt(theta * theta + d * d) <= LYAPUNOV_EXCLUSION_RADIUS
        {
            continue;
        }
        let f = stbsf.eval(&State::planar(theta, d))?;
        let vdot = d * params.beta * exp(-params.alpha * f * f) * sin(theta);
        checks.push(LyapunovCheck { theta, d, vdot, pass: vdot < 0.0 });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(LyapunovReport { checks, pass })
}

/// Cone-entry record for one initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub theta0: f64,
    pub d0: f64,
    /// First time the membership slack is nonnegative; none on timeout or
    /// crash before entry.
    pub entry_time: Option<f64>,
    /// Smallest membership slack seen after entry.
    pub min_slack_after: f64,
    pub event: Event,
}

/// Simulate each initial condition and record when it enters the cone pair.
/// Invariance is cross-checked by tracking the post-entry slack minimum.
pub fn finite_time_entry(
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
    cones: &ConePair,
    ic_grid: &[(f64, f64)],
    cfg: &SimConfig,
) -> Result<Vec<EntryRecord>> {
    // Entry may postdate reaching the default convergence box, so keep
    // integrating until the origin ball itself is reached (or the horizon).
    let tight = SimConfig {
        conv_d: LYAPUNOV_EXCLUSION_RADIUS,
        conv_theta: LYAPUNOV_EXCLUSION_RADIUS,
        ..*cfg
    };
    let mut out = Vec::with_capacity(ic_grid.len());
    for &(theta0, d0) in ic_grid {
        let traj = simulate(&State::planar(theta0, d0), stbsf, params, &tight)?;
        let mut entry_time = None;
        let mut min_slack_after = f64::INFINITY;
        for s in &traj.samples {
            let slack = cones.membership_slack(s.state.theta, s.state.d);
            let in_ball = sqrt(s.state.theta * s.state.theta + s.state.d * s.state.d)
                <= LYAPUNOV_EXCLUSION_RADIUS;
            if entry_time.is_none() && (slack >= 0.0 || in_ball) {
                entry_time = Some(s.t);
            }
            if entry_time.is_some() {
                // Inside the origin ball membership is satisfied by fiat.
                min_slack_after = min_slack_after.min(if in_ball { 0.0 } else { slack });
            }
        }
        out.push(EntryRecord { theta0, d0, entry_time, min_slack_after, event: traj.event });
    }
    Ok(out)
}

/// Pick `beta = safety * gamma * admissible_ratio`, where the admissible
/// ratio combines the closed-form limit with the sampled line bound on the
/// inner line of both cones.
pub fn recommend_params(
    stbsf: &dyn ScoreFunction,
    bounds: &SlopeBounds,
    gamma: f64,
    alpha: f64,
    safety: f64,
) -> Result<ControllerParams> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidConfig("safety fraction must lie in (0, 1)"));
    }
    let admissible = admissible_ratio(stbsf, bounds, alpha, DEFAULT_D_STAR)?;
    ControllerParams::new(alpha, safety * gamma * admissible.2, gamma)
}

/// `(delta_analytic, delta_numeric, admissible)` for the inner line.
pub fn admissible_ratio(
    stbsf: &dyn ScoreFunction,
    bounds: &SlopeBounds,
    alpha: f64,
    d_star: f64,
) -> Result<(f64, f64, f64)> {
    let cones = ConePair::new(bounds, d_star)?;
    let delta = compute_delta(stbsf, bounds.l_inner)?;
    let mut samples = log_spaced(1e-4, cones.theta_extent(), 64);
    let negs: Vec<f64> = samples.iter().map(|t| -t).collect();
    samples.extend(negs);
    let numeric = numeric_ratio_bound(stbsf, alpha, bounds.l_inner, &samples)?;
    Ok((delta, numeric, delta.min(numeric)))
}

/// Full sampled certificate for one score/parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub delta_analytic: f64,
    pub delta_numeric: f64,
    pub admissible_ratio: f64,
    /// The `beta/gamma` actually used.
    pub ratio: f64,
    pub bounds: SlopeBounds,
    pub cones: ConePair,
    pub boundary: BoundaryReport,
    pub lyapunov: LyapunovReport,
    /// All checks pass and `ratio < admissible_ratio`.
    pub verdict: bool,
}

/// Certification knobs; defaults reproduce the standard corridor setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    pub theta_lim: f64,
    pub n_curve: usize,
    /// Slope margin as a fraction of `inf |h'|`.
    pub margin_frac: f64,
    pub curve_tol: f64,
    pub d_star: f64,
    pub n_boundary: usize,
    pub n_interior: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            theta_lim: 1.2,
            n_curve: 241,
            margin_frac: DEFAULT_MARGIN_FRAC,
            curve_tol: 1e-9,
            d_star: DEFAULT_D_STAR,
            n_boundary: 64,
            n_interior: 500,
            seed: 0,
        }
    }
}

/// Run the full pipeline: curve, slope bounds, cones, admissible ratio,
/// boundary and Lyapunov sampling, verdict.
pub fn build_certificate(
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
    cfg: &CertifyConfig,
) -> Result<StabilityCertificate> {
    let grid: Vec<f64> = (0..cfg.n_curve)
        .map(|k| -cfg.theta_lim + 2.0 * cfg.theta_lim * k as f64 / (cfg.n_curve - 1) as f64)
        .collect();
    let curve = solve_implicit_curve(stbsf, &grid, cfg.curve_tol, cfg.d_star)?;
    let inf_slope = curve.slopes.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()));
    let bounds = slope_bounds(&curve, cfg.margin_frac * inf_slope)?;
    let cones = ConePair::new(&bounds, cfg.d_star)?;
    let (delta_analytic, delta_numeric, admissible) =
        admissible_ratio(stbsf, &bounds, params.alpha, cfg.d_star)?;
    let boundary = certify_invariance(stbsf, params, &cones, cfg.n_boundary)?;
    let lyapunov = certify_lyapunov(stbsf, params, &cones, cfg.n_interior, cfg.seed)?;
    let ratio = params.ratio();
    let verdict = boundary.pass && lyapunov.pass && ratio < admissible;
    Ok(StabilityCertificate {
        delta_analytic,
        delta_numeric,
        admissible_ratio: admissible,
        ratio,
        bounds,
        cones,
        boundary,
        lyapunov,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::AffineStBSF;
    use approx::assert_abs_diff_eq;

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn affine_unit() -> AffineStBSF {
        AffineStBSF::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn curve_affine_is_minus_theta() {
        let f = affine_unit();
        let grid = linspace(-1.0, 1.0, 81);
        let c = solve_implicit_curve(&f, &grid, 1e-9, DEFAULT_D_STAR).unwrap();
        assert_eq!(c.len(), 81);
        for (&t, &d) in c.theta_samples.iter().zip(&c.d_values) {
            assert_abs_diff_eq!(d, -t, epsilon = 1e-8);
        }
        for &s in &c.slopes {
            assert_abs_diff_eq!(s, -1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn curve_cubic_sample() {
        let f = AffineStBSF::new(1.0, 1.0, 0.5).unwrap();
        let c = solve_implicit_curve(&f, &[0.4], 1e-9, DEFAULT_D_STAR).unwrap();
        assert_abs_diff_eq!(c.d_values[0], -0.432, epsilon = 1e-8);
    }

    #[test]
    fn curve_residual_self_check() {
        let f = AffineStBSF::new(0.8, 1.3, 0.4).unwrap();
        let grid = linspace(-1.2, 1.2, 97);
        let c = solve_implicit_curve(&f, &grid, 1e-9, DEFAULT_D_STAR).unwrap();
        assert!(!c.is_empty());
        for (&t, &d) in c.theta_samples.iter().zip(&c.d_values) {
            assert!(f.value(t, d).abs() <= 1e-9);
            // Third Lemma claim: the curve stays in the opposite quadrant.
            if t != 0.0 {
                assert!(t * d < 0.0, "theta={t} d={d}");
            }
        }
    }

    #[test]
    fn curve_drops_out_of_band_samples() {
        // Steep curve h(theta) = -2 theta leaves |d| <= 1.22 at |theta| > 0.61.
        let f = AffineStBSF::new(2.0, 1.0, 0.0).unwrap();
        let grid = linspace(-1.0, 1.0, 101);
        let c = solve_implicit_curve(&f, &grid, 1e-9, DEFAULT_D_STAR).unwrap();
        assert!(c.len() < 101);
        assert!(c.domain.0 >= -0.62 && c.domain.1 <= 0.62);
        for &t in &c.theta_samples {
            assert!(t.abs() <= 0.61 + 1e-12);
        }
    }

    #[test]
    fn slope_bounds_affine() {
        let f = affine_unit();
        let c = solve_implicit_curve(&f, &linspace(-1.0, 1.0, 41), 1e-9, DEFAULT_D_STAR)
            .unwrap();
        let b = slope_bounds(&c, 0.1).unwrap();
        assert_abs_diff_eq!(b.l_inner, 0.9, epsilon = 1e-8);
        assert_abs_diff_eq!(b.l_outer, 1.1, epsilon = 1e-8);
    }

    #[test]
    fn slope_bounds_half_slope() {
        let f = AffineStBSF::new(1.0, 2.0, 0.0).unwrap();
        let c = solve_implicit_curve(&f, &linspace(-1.0, 1.0, 41), 1e-9, DEFAULT_D_STAR)
            .unwrap();
        let b = slope_bounds(&c, 0.1).unwrap();
        assert_abs_diff_eq!(b.l_inner, 0.4, epsilon = 1e-8);
        assert_abs_diff_eq!(b.l_outer, 0.6, epsilon = 1e-8);
    }

    #[test]
    fn slope_bounds_rejects_large_margin() {
        let f = AffineStBSF::new(1.0, 2.0, 0.0).unwrap();
        let c = solve_implicit_curve(&f, &linspace(-1.0, 1.0, 41), 1e-9, DEFAULT_D_STAR)
            .unwrap();
        assert!(matches!(
            slope_bounds(&c, 0.5),
            Err(Error::DegenerateSlopes { .. })
        ));
    }

    #[test]
    fn chord_containment_on_cubic() {
        let f = AffineStBSF::new(1.0, 1.0, 0.5).unwrap();
        let c = solve_implicit_curve(&f, &linspace(-0.9, 0.9, 121), 1e-9, DEFAULT_D_STAR)
            .unwrap();
        let inf = c.slopes.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()));
        let b = slope_bounds(&c, 0.1 * inf).unwrap();
        for (&t, &d) in c.theta_samples.iter().zip(&c.d_values) {
            assert!(b.l_inner * t.abs() <= d.abs() + 1e-9);
            assert!(d.abs() <= b.l_outer * t.abs() + 1e-9);
        }
    }

    #[test]
    fn delta_affine_closed_forms() {
        let f = affine_unit();
        assert_abs_diff_eq!(compute_delta(&f, 0.9).unwrap(), 0.09, epsilon = 1e-12);
        assert!(matches!(
            compute_delta(&f, 1.1),
            Err(Error::NonPositiveDelta { .. })
        ));
        let g = AffineStBSF::new(1.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(compute_delta(&g, 0.4).unwrap(), 0.08, epsilon = 1e-12);
    }

    #[test]
    fn ratio_bound_converges_to_delta() {
        let f = affine_unit();
        let samples = log_spaced(1e-3, 1.2, 200);
        let bound = numeric_ratio_bound(&f, 0.0, 0.9, &samples).unwrap();
        assert!((bound - 0.09).abs() / 0.09 < 0.01, "bound {bound}");
        // The closed-form ratio 0.09 theta / sin(theta) >= 0.09.
        assert!(bound >= 0.09 - 1e-12);
    }

    #[test]
    fn ratio_bound_alpha_only_increases() {
        let f = affine_unit();
        let samples = log_spaced(1e-3, 1.2, 100);
        let b0 = numeric_ratio_bound(&f, 0.0, 0.9, &samples).unwrap();
        let b1 = numeric_ratio_bound(&f, 5e-5, 0.9, &samples).unwrap();
        assert!(b1 >= b0);
    }

    #[test]
    fn ratio_bound_cubic_matches_refined_grid() {
        let f = AffineStBSF::new(1.0, 1.0, 0.5).unwrap();
        let coarse = log_spaced(1e-3, 0.9, 64);
        let fine = log_spaced(1e-3, 0.9, 640);
        let bc = numeric_ratio_bound(&f, 0.0, 0.9, &coarse).unwrap();
        let bf = numeric_ratio_bound(&f, 0.0, 0.9, &fine).unwrap();
        assert!((bc - bf).abs() / bf < 0.05, "coarse {bc} fine {bf}");
    }

    #[test]
    fn ratio_bound_rejects_wrong_side_line() {
        // L = 1.1 > |h'| puts F on the wrong side of zero along the line.
        let f = affine_unit();
        let samples = log_spaced(1e-3, 1.0, 32);
        assert!(matches!(
            numeric_ratio_bound(&f, 0.0, 1.1, &samples),
            Err(Error::NegativeRatioSample { .. })
        ));
    }

    fn unit_cones() -> ConePair {
        ConePair {
            l_inner: 0.9,
            l_outer: 1.1,
            d_star: DEFAULT_D_STAR,
        }
    }

    #[test]
    fn membership_slack_cases() {
        let k = unit_cones();
        // On the curve d = -theta: inside.
        assert!(k.contains(0.5, -0.5));
        assert!(k.contains(-0.5, 0.5));
        // Origin: boundary of both cones.
        assert_eq!(k.membership_slack(0.0, 0.0), 0.0);
        // Same-sign quadrant: outside.
        assert!(!k.contains(0.5, 0.5));
        // Too shallow and too steep: outside.
        assert!(!k.contains(0.5, -0.3));
        assert!(!k.contains(0.5, -0.7));
        // Beyond the cap: outside.
        assert!(!k.contains(1.3, -1.25));
    }

    #[test]
    fn invariance_passes_below_delta() {
        let f = affine_unit();
        let p = ControllerParams::new(0.0, 0.045, 1.0).unwrap();
        let rep = certify_invariance(&f, &p, &unit_cones(), 64).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn invariance_fails_above_delta_on_inner_line() {
        let f = affine_unit();
        let p = ControllerParams::new(0.0, 0.18, 1.0).unwrap();
        let rep = certify_invariance(&f, &p, &unit_cones(), 64).unwrap();
        assert!(!rep.pass);
        let failures: Vec<_> = rep.checks.iter().filter(|c| !c.pass).collect();
        assert!(!failures.is_empty());
        assert!(failures.iter().all(|c| c.segment == Segment::InnerLine));
        // The binding region is near the origin.
        assert!(failures.iter().any(|c| c.theta.abs() < 0.1));
    }

    #[test]
    fn outer_line_always_passes() {
        let f = affine_unit();
        for beta in [0.045, 0.18, 2.0, 20.0] {
            let p = ControllerParams::new(0.0, beta, 1.0).unwrap();
            let rep = certify_invariance(&f, &p, &unit_cones(), 32).unwrap();
            assert!(rep
                .checks
                .iter()
                .filter(|c| c.segment == Segment::OuterLine)
                .all(|c| c.pass));
        }
    }

    #[test]
    fn monotone_safety_in_ratio() {
        let f = affine_unit();
        let k = unit_cones();
        let hi = ControllerParams::new(0.0, 0.08, 1.0).unwrap();
        let lo = ControllerParams::new(0.0, 0.02, 1.0).unwrap();
        assert!(certify_invariance(&f, &hi, &k, 64).unwrap().pass);
        assert!(certify_invariance(&f, &lo, &k, 64).unwrap().pass);
    }

    #[test]
    fn lyapunov_all_samples_decrease() {
        let f = affine_unit();
        let p = ControllerParams::new(5e-5, 0.045, 1.0).unwrap();
        let rep = certify_lyapunov(&f, &p, &unit_cones(), 500, 7).unwrap();
        assert_eq!(rep.checks.len(), 500);
        assert!(rep.pass);
        for c in &rep.checks {
            assert!(c.vdot < 0.0);
            let r = sqrt(c.theta * c.theta + c.d * c.d);
            assert!(r > LYAPUNOV_EXCLUSION_RADIUS);
        }
    }

    #[test]
    fn lyapunov_sampling_deterministic() {
        let f = affine_unit();
        let p = ControllerParams::new(0.0, 0.045, 1.0).unwrap();
        let a = certify_lyapunov(&f, &p, &unit_cones(), 50, 3).unwrap();
        let b = certify_lyapunov(&f, &p, &unit_cones(), 50, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entry_time_zero_inside_cone() {
        let f = affine_unit();
        let p = ControllerParams::new(0.0, 0.045, 1.0).unwrap();
        let recs = finite_time_entry(
            &f,
            &p,
            &unit_cones(),
            &[(0.5, -0.5)],
            &SimConfig::default(),
        )
        .unwrap();
        assert_eq!(recs[0].entry_time, Some(0.0));
    }

    #[test]
    fn entry_grid_finite_and_invariant_after() {
        let f = affine_unit();
        let p = ControllerParams::new(0.0, 0.045, 1.0).unwrap();
        let k = unit_cones();
        let mut ics = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                ics.push((
                    -1.0 + 0.5 * i as f64,
                    (-0.9 + 0.45 * j as f64) * DEFAULT_D_STAR,
                ));
            }
        }
        let recs =
            finite_time_entry(&f, &p, &k, &ics, &SimConfig::default()).unwrap();
        for r in &recs {
            let t = r.entry_time.expect("entry must happen");
            assert!(t < 60.0, "ic ({}, {}) entered at {t}", r.theta0, r.d0);
            assert!(
                r.min_slack_after >= -1e-6,
                "post-entry slack {} at ic ({}, {})",
                r.min_slack_after,
                r.theta0,
                r.d0
            );
        }
    }

    #[test]
    fn recommend_params_affine() {
        let f = affine_unit();
        let c = solve_implicit_curve(&f, &linspace(-1.0, 1.0, 41), 1e-9, DEFAULT_D_STAR)
            .unwrap();
        let b = slope_bounds(&c, 0.1).unwrap();
        let p = recommend_params(&f, &b, 1.0, 0.0, 0.5).unwrap();
        assert_abs_diff_eq!(p.beta, 0.045, epsilon = 1e-9);
        assert!(matches!(
            recommend_params(&f, &b, 1.0, 0.0, 1.0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn recommend_params_cubic_passes_invariance() {
        let f = AffineStBSF::new(1.0, 1.0, 0.5).unwrap();
        let c = solve_implicit_curve(&f, &linspace(-0.9, 0.9, 121), 1e-9, DEFAULT_D_STAR)
            .unwrap();
        let inf = c.slopes.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()));
        let b = slope_bounds(&c, 0.1 * inf).unwrap();
        let p = recommend_params(&f, &b, 1.0, 5e-5, 0.5).unwrap();
        let k = ConePair::new(&b, DEFAULT_D_STAR).unwrap();
        assert!(certify_invariance(&f, &p, &k, 64).unwrap().pass);
    }

    #[test]
    fn certificate_soundness_affine() {
        let f = affine_unit();
        let cfg = CertifyConfig::default();
        let good = ControllerParams::new(0.0, 0.045, 1.0).unwrap();
        let bad = ControllerParams::new(0.0, 0.18, 1.0).unwrap();
        let cg = build_certificate(&f, &good, &cfg).unwrap();
        let cb = build_certificate(&f, &bad, &cfg).unwrap();
        assert!(cg.verdict);
        assert_abs_diff_eq!(cg.delta_analytic, 0.09, epsilon = 1e-8);
        assert!((cg.delta_numeric - 0.09).abs() / 0.09 < 0.01);
        assert!(!cb.verdict);
        assert!(!cb.boundary.pass);
    }

    #[test]
    fn certificate_deterministic() {
        let f = AffineStBSF::new(1.0, 1.0, 0.3).unwrap();
        let p = ControllerParams::new(5e-5, 0.03, 1.0).unwrap();
        let cfg = CertifyConfig::default();
        let a = build_certificate(&f, &p, &cfg).unwrap();
        let b = build_certificate(&f, &p, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn log_spaced_endpoints_and_order() {
        let v = log_spaced(1e-4, 1.2, 64);
        assert_eq!(v.len(), 64);
        assert_abs_diff_eq!(v[0], 1e-4, epsilon = 1e-12);
        assert_abs_diff_eq!(v[63], 1.2, epsilon = 1e-12);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn delta_via_finite_difference_partials() {
        // A score without closed-form partials exercises the FD fallback.
        struct NoPartials(AffineStBSF);
        impl ScoreFunction for NoPartials {
            fn eval(&self, st: &State) -> crate::Result<f64> {
                self.0.eval(st)
            }
        }
        let f = NoPartials(affine_unit());
        let d = compute_delta(&f, 0.9).unwrap();
        assert_abs_diff_eq!(d, 0.09, epsilon = 1e-7);
        let c = solve_implicit_curve(&f, &[-0.5, 0.5], 1e-9, DEFAULT_D_STAR)
            .unwrap();
        assert!(c.slopes.iter().all(|s| (s + 1.0).abs() < 1e-6));
    }
}
