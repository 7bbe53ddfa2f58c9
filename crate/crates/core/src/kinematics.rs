//! Unicycle kinematics in local path coordinates and closed-loop simulation.
//!
//! States live in the admissible region `X = {|theta| < pi/2, |d| < d_star}`.
//! The simulator integrates with fixed-step classical RK4 and holds control
//! inputs zero-order between control updates, so control rates slower than
//! the integration rate are representable.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{cos, exp, sin};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::ScoreFunction;

/// Margin on `1 - rho(s) d` below which the orthogonal projection is singular.
pub const SINGULARITY_MARGIN: f64 = 1e-6;

/// Local path coordinates of the robot relative to the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Heading error to the path tangent (rad).
    pub theta: f64,
    /// Signed lateral offset (m).
    pub d: f64,
    /// Arc length of the projected point along the path (m).
    pub s: f64,
}

impl State {
    pub const fn new(theta: f64, d: f64, s: f64) -> Self {
        State { theta, d, s }
    }

    /// Planar state with `s = 0`; analysis routines ignore `s`.
    pub const fn planar(theta: f64, d: f64) -> Self {
        State { theta, d, s: 0.0 }
    }
}

/// Time derivatives of the local path coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub dtheta: f64,
    pub dd: f64,
    pub ds: f64,
}

/// Parameters of the smooth control law `omega = gamma F`,
/// `v = beta exp(-alpha F^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Forward velocity decay rate (>= 0).
    pub alpha: f64,
    /// Maximum forward velocity (m/s, > 0).
    pub beta: f64,
    /// Angular velocity gain (rad/s per score unit, > 0).
    pub gamma: f64,
}

impl ControllerParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidConfig("alpha must be >= 0"));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidConfig("beta must be > 0"));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be > 0"));
        }
        Ok(ControllerParams { alpha, beta, gamma })
    }

    pub fn ratio(&self) -> f64 {
        self.beta / self.gamma
    }
}

/// Path geometry seen by the orthogonal-projection kinematics.
pub trait Path {
    /// Curvature `rho(s)` in 1/m.
    fn curvature(&self, s: f64) -> f64;
}

/// Zero-curvature path.
#[derive(Debug, Clone, Copy, Default)]
pub struct StraightPath;

impl Path for StraightPath {
    fn curvature(&self, _s: f64) -> f64 {
        0.0
    }
}

/// Circular arc with constant curvature.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurvature(pub f64);

impl Path for ConstantCurvature {
    fn curvature(&self, _s: f64) -> f64 {
        self.0
    }
}

/// Orthogonal-projection kinematics:
/// `sdot = v cos(theta) / (1 - rho d)`, `ddot = v sin(theta)`,
/// `thetadot = omega - v cos(theta) rho / (1 - rho d)`.
pub fn dynamics_rhs(state: &State, v: f64, omega: f64, path: &dyn Path) -> Result<Derivative> {
    let rho = path.curvature(state.s);
    let denom = 1.0 - rho * state.d;
    if denom.abs() <= SINGULARITY_MARGIN {
        return Err(Error::Singularity { s: state.s, d: state.d });
    }
    let vc = v * cos(state.theta);
    Ok(Derivative {
        dtheta: omega - vc * rho / denom,
        dd: v * sin(state.theta),
        ds: vc / denom,
    })
}

/// Closed-loop vector field on a straight path:
/// `thetadot = gamma F`, `ddot = beta exp(-alpha F^2) sin(theta)`.
pub fn closed_loop_rhs(
    state: &State,
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
) -> Result<Derivative> {
    let f = stbsf.eval(state)?;
    let (v, omega) = SmoothController(*params).control(f);
    dynamics_rhs(state, v, omega, &StraightPath)
}

/// One classical fourth-order Runge-Kutta step. Deterministic, no adaptivity.
pub fn step_rk4<F>(state: &State, rhs: F, dt: f64) -> Result<State>
where
    F: Fn(&State) -> Result<Derivative>,
{
    let shift = |st: &State, k: &Derivative, h: f64| State {
        theta: st.theta + h * k.dtheta,
        d: st.d + h * k.dd,
        s: st.s + h * k.ds,
    };
    let k1 = rhs(state)?;
    let k2 = rhs(&shift(state, &k1, dt / 2.0))?;
    let k3 = rhs(&shift(state, &k2, dt / 2.0))?;
    let k4 = rhs(&shift(state, &k3, dt))?;
    Ok(State {
        theta: state.theta + dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta),
        d: state.d + dt / 6.0 * (k1.dd + 2.0 * k2.dd + 2.0 * k3.dd + k4.dd),
        s: state.s + dt / 6.0 * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds),
    })
}

/// Maps a score sample to control inputs `(v, omega)`.
pub trait Controller {
    fn control(&self, score: f64) -> (f64, f64);
}

/// The smooth law `omega = gamma F`, `v = beta exp(-alpha F^2)`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothController(pub ControllerParams);

impl Controller for SmoothController {
    fn control(&self, score: f64) -> (f64, f64) {
        let p = &self.0;
        (p.beta * exp(-p.alpha * score * score), p.gamma * score)
    }
}

/// Simulation configuration. Defaults match a 100 Hz control loop and a
/// corridor whose walls sit at `|d| = 1.22 m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Control update period (s); must be an integer multiple of `dt`.
    pub control_period: f64,
    /// Simulation horizon (s).
    pub t_max: f64,
    /// Crash threshold on `|d|` (m).
    pub d_star: f64,
    /// Convergence threshold on `|d|` (m).
    pub conv_d: f64,
    /// Convergence threshold on `|theta|` (rad).
    pub conv_theta: f64,
    /// Time both convergence thresholds must hold (s).
    pub dwell: f64,
}

pub const DEFAULT_D_STAR: f64 = 1.22;

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            control_period: 0.01,
            t_max: 60.0,
            d_star: DEFAULT_D_STAR,
            conv_d: 0.05 * DEFAULT_D_STAR,
            conv_theta: 0.05,
            dwell: 1.0,
        }
    }
}

impl SimConfig {
    /// Steps per control update; errors unless `control_period` is a
    /// positive integer multiple of `dt`.
    pub fn steps_per_control(&self) -> Result<usize> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be > 0"));
        }
        let ratio = self.control_period / self.dt;
        let n = libm::round(ratio);
        if n < 1.0 || (ratio - n).abs() > 1e-9 {
            return Err(Error::InvalidConfig(
                "control_period must be an integer multiple of dt",
            ));
        }
        Ok(n as usize)
    }
}

/// Trajectory termination event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Converged,
    Crashed,
    Timeout,
    Singularity,
}

/// One recorded simulation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub score: f64,
    pub v: f64,
    pub omega: f64,
}

/// Time-indexed record of state, score, and control values.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub event: Event,
    pub dt: f64,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }
}

/// Simulate the smooth closed loop from `x0` until an event fires.
pub fn simulate(
    x0: &State,
    stbsf: &dyn ScoreFunction,
    params: &ControllerParams,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    simulate_with(x0, stbsf, &SmoothController(*params), &StraightPath, cfg)
}

/// Simulate an arbitrary score-fed controller over an arbitrary path.
///
/// The score is evaluated and recorded at every integration step; control
/// inputs are refreshed only at control ticks and held in between.
pub fn simulate_with(
    x0: &State,
    stbsf: &dyn ScoreFunction,
    controller: &dyn Controller,
    path: &dyn Path,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let steps_per_control = cfg.steps_per_control()?;
    let mut samples = Vec::new();
    let mut state = *x0;
    let mut step = 0usize;
    let mut dwell = 0.0_f64;
    let (mut v, mut omega) = (0.0, 0.0);

    let event = loop {
        let t = step as f64 * cfg.dt;
        let score = match stbsf.eval(&state) {
            Ok(f) => f,
            Err(Error::PoseOutsideCorridor { .. }) => {
                // Score undefined outside the walls: the pose has crashed.
                samples.push(Sample { t, state, score: f64::NAN, v, omega });
                break Event::Crashed;
            }
            Err(e) => return Err(e),
        };
        if step.is_multiple_of(steps_per_control) {
            let c = controller.control(score);
            v = c.0;
            omega = c.1;
        }
        samples.push(Sample { t, state, score, v, omega });

        if state.d.abs() >= cfg.d_star || state.theta.abs() >= FRAC_PI_2 {
            break Event::Crashed;
        }
        if state.d.abs() < cfg.conv_d && state.theta.abs() < cfg.conv_theta {
            if dwell >= cfg.dwell - 1e-12 {
                break Event::Converged;
            }
            dwell += cfg.dt;
        } else {
            dwell = 0.0;
        }
        if t >= cfg.t_max {
            break Event::Timeout;
        }

        match step_rk4(&state, |st| dynamics_rhs(st, v, omega, path), cfg.dt) {
            Ok(next) => state = next,
            Err(Error::Singularity { .. }) => break Event::Singularity,
            Err(e) => return Err(e),
        }
        step += 1;
    };

    Ok(Trajectory { samples, event, dt: cfg.dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::AffineStBSF;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rhs_aligned_on_path() {
        let k = dynamics_rhs(&State::planar(0.0, 0.0), 1.0, 0.0, &StraightPath).unwrap();
        assert_eq!((k.dtheta, k.dd, k.ds), (0.0, 0.0, 1.0));
    }

    #[test]
    fn rhs_perpendicular_heading() {
        let k = dynamics_rhs(&State::planar(FRAC_PI_2, 0.0), 1.0, 0.0, &StraightPath).unwrap();
        assert_abs_diff_eq!(k.dtheta, 0.0);
        assert_abs_diff_eq!(k.dd, 1.0);
        assert!(k.ds.abs() < 1e-15);
    }

    #[test]
    fn rhs_curved_path_matches_formulas() {
        // Hand evaluation of the three formulas at theta=0.3, d=0.4, rho=0.5,
        // v=1, omega=0.1 (independent one-off arithmetic):
        //   denom = 1 - 0.5*0.4 = 0.8
        //   ds    = cos(0.3)/0.8          = 1.1941706114070074
        //   dd    = sin(0.3)              = 0.29552020666133955
        //   dth   = 0.1 - cos(0.3)*0.5/0.8 = -0.49708530570350373
        let k = dynamics_rhs(
            &State::planar(0.3, 0.4),
            1.0,
            0.1,
            &ConstantCurvature(0.5),
        )
        .unwrap();
        assert_abs_diff_eq!(k.ds, 1.1941706114070074, epsilon = 1e-14);
        assert_abs_diff_eq!(k.dd, 0.29552020666133955, epsilon = 1e-14);
        assert_abs_diff_eq!(k.dtheta, -0.49708530570350373, epsilon = 1e-14);
    }

    #[test]
    fn rhs_singularity_detected() {
        let r = dynamics_rhs(&State::new(0.0, 2.0, 0.0), 1.0, 0.0, &ConstantCurvature(0.5));
        assert!(matches!(r, Err(Error::Singularity { .. })));
    }

    #[test]
    fn closed_loop_origin_is_equilibrium() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 1.0, 1.0).unwrap();
        let k = closed_loop_rhs(&State::planar(0.0, 0.0), &f, &p).unwrap();
        assert_eq!(k.dtheta, 0.0);
        assert_eq!(k.dd, 0.0);
    }

    #[test]
    fn closed_loop_affine_substitution() {
        // F = -theta - d at (0.1, 0.2), alpha=0, beta=gamma=1.
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 1.0, 1.0).unwrap();
        let k = closed_loop_rhs(&State::planar(0.1, 0.2), &f, &p).unwrap();
        assert_abs_diff_eq!(k.dtheta, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(k.dd, sin(0.1), epsilon = 1e-15);
    }

    #[test]
    fn closed_loop_large_alpha_suppresses_dd() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let slow = ControllerParams::new(1e6, 1.0, 1.0).unwrap();
        let fast = ControllerParams::new(0.0, 1.0, 1.0).unwrap();
        let ks = closed_loop_rhs(&State::planar(0.1, 0.2), &f, &slow).unwrap();
        let kf = closed_loop_rhs(&State::planar(0.1, 0.2), &f, &fast).unwrap();
        assert!(ks.dd.abs() < 1e-12);
        assert_abs_diff_eq!(ks.dtheta, kf.dtheta);
    }

    #[test]
    fn rk4_zero_field_is_identity() {
        let x = State::new(0.2, -0.3, 1.5);
        let y = step_rk4(
            &x,
            |_| Ok(Derivative { dtheta: 0.0, dd: 0.0, ds: 0.0 }),
            0.1,
        )
        .unwrap();
        assert_eq!(x, y);
    }

    /// Closed-form circular arc under constant controls on a straight path:
    /// d(t) = d0 + (v/omega)(cos(theta0) - cos(theta0 + omega t)).
    fn arc_error(dt: f64) -> f64 {
        let (v, omega) = (1.0, 0.7);
        let (theta0, d0) = (0.2, -0.1);
        let t_final = 2.0;
        let n = libm::round(t_final / dt) as usize;
        let mut st = State::planar(theta0, d0);
        for _ in 0..n {
            st = step_rk4(&st, |x| dynamics_rhs(x, v, omega, &StraightPath), dt).unwrap();
        }
        let exact = d0 + v / omega * (cos(theta0) - cos(theta0 + omega * t_final));
        (st.d - exact).abs()
    }

    #[test]
    fn rk4_fourth_order_on_arc() {
        let e1 = arc_error(0.02);
        let e2 = arc_error(0.01);
        assert!(e1 < 1e-8, "coarse error too large: {e1}");
        assert!(e1 / e2 >= 12.0, "convergence ratio {} below 4th order", e1 / e2);
    }

    #[test]
    fn simulate_equilibrium_converges_after_dwell() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 0.2, 1.0).unwrap();
        let cfg = SimConfig::default();
        let traj = simulate(&State::planar(0.0, 0.0), &f, &p, &cfg).unwrap();
        assert_eq!(traj.event, Event::Converged);
        assert_abs_diff_eq!(traj.t_end(), cfg.dwell, epsilon = cfg.dt);
    }

    #[test]
    fn simulate_affine_converges_and_matches_euler_reference() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 0.2, 1.0).unwrap();
        let cfg = SimConfig::default();
        let traj = simulate(&State::planar(0.4, 0.3), &f, &p, &cfg).unwrap();
        assert_eq!(traj.event, Event::Converged);
        assert!(traj.t_end() < 60.0);

        // Independent forward-Euler reference at dt = 1e-4 with continuous
        // feedback; compare d at t = 5 s.
        let mut th = 0.4_f64;
        let mut d = 0.3_f64;
        let h = 1e-4;
        for _ in 0..50_000 {
            let score = -th - d;
            let (dth, dd) = (p.gamma * score, p.beta * sin(th));
            th += h * dth;
            d += h * dd;
        }
        let at5 = traj
            .samples
            .iter()
            .min_by(|a, b| {
                (a.t - 5.0).abs().partial_cmp(&(b.t - 5.0).abs()).unwrap()
            })
            .unwrap();
        assert_abs_diff_eq!(at5.state.d, d, epsilon = 5e-4);
        assert_abs_diff_eq!(at5.state.theta, th, epsilon = 5e-4);
    }

    #[test]
    fn simulate_holds_controls_between_ticks() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 0.2, 1.0).unwrap();
        let cfg = SimConfig { control_period: 0.05, ..SimConfig::default() };
        let traj = simulate(&State::planar(0.4, 0.3), &f, &p, &cfg).unwrap();
        assert_eq!(traj.event, Event::Converged);
        for (k, w) in traj.samples.windows(2).enumerate() {
            if (k + 1) % 5 != 0 {
                // Not a control tick: inputs held from the previous step.
                assert_eq!(w[1].v, w[0].v);
                assert_eq!(w[1].omega, w[0].omega);
            } else {
                // Ticks re-sample the law from the current score.
                let c = SmoothController(p).control(w[1].score);
                assert_eq!((w[1].v, w[1].omega), c);
            }
        }
        // The held inputs genuinely differ from a 100 Hz run.
        let cont = simulate(&State::planar(0.4, 0.3), &f, &p, &SimConfig::default()).unwrap();
        assert!(traj.samples[3].omega != cont.samples[3].omega);
    }

    #[test]
    fn simulate_crash_detected() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        // Huge beta/gamma drives d past the wall.
        let p = ControllerParams::new(0.0, 20.0, 1.0).unwrap();
        let cfg = SimConfig::default();
        let traj = simulate(&State::planar(0.6, 0.9), &f, &p, &cfg).unwrap();
        assert_eq!(traj.event, Event::Crashed);
        let last = traj.samples.last().unwrap();
        assert!(last.state.d.abs() >= cfg.d_star || last.state.theta.abs() >= FRAC_PI_2);
    }

    #[test]
    fn simulate_dd_sign_matches_heading() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 1.0, 1.0).unwrap();
        for &(th, want_pos) in &[(0.3, true), (1.2, true), (-0.3, false), (-1.2, false)] {
            let k = closed_loop_rhs(&State::planar(th, 0.0), &f, &p).unwrap();
            assert_eq!(k.dd > 0.0, want_pos, "theta={th}");
        }
    }

    #[test]
    fn curvature_disturbance_stays_bounded() {
        // Affine score, admissible ratio, constant rho = 0.05: all standard
        // ICs remain inside |d| < d_star over the horizon.
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 0.045, 1.0).unwrap();
        let cfg = SimConfig::default();
        let path = ConstantCurvature(0.05);
        for ic in crate::experiments::default_ic_grid(cfg.d_star) {
            let traj = simulate_with(
                &State::planar(ic.0, ic.1),
                &f,
                &SmoothController(p),
                &path,
                &cfg,
            )
            .unwrap();
            assert_ne!(traj.event, Event::Crashed, "ic={ic:?}");
            assert!(traj.samples.iter().all(|s| s.state.d.abs() < cfg.d_star));
        }
    }

    #[test]
    fn control_period_must_divide() {
        let cfg = SimConfig { control_period: 0.015, ..SimConfig::default() };
        assert!(cfg.steps_per_control().is_err());
        let cfg = SimConfig { control_period: 1.0 / 15.0, dt: 1.0 / 300.0, ..SimConfig::default() };
        assert_eq!(cfg.steps_per_control().unwrap(), 20);
    }

    #[test]
    fn trajectory_timestamps_strictly_increasing() {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let p = ControllerParams::new(0.0, 0.2, 1.0).unwrap();
        let traj = simulate(&State::planar(0.4, 0.3), &f, &p, &SimConfig::default()).unwrap();
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
            assert_abs_diff_eq!(w[1].t - w[0].t, traj.dt, epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_exit_flagged_as_event() {
        // Start just inside X with a score that pushes theta outward.
        struct Outward;
        impl ScoreFunction for Outward {
            fn eval(&self, _: &State) -> Result<f64> {
                Ok(1.0)
            }
        }
        let p = ControllerParams::new(0.0, 0.1, 2.0).unwrap();
        let traj = simulate(&State::planar(1.4, 0.0), &Outward, &p, &SimConfig::default()).unwrap();
        assert_eq!(traj.event, Event::Crashed);
        assert!(traj.samples.last().unwrap().state.theta.abs() >= FRAC_PI_2);
    }
}
