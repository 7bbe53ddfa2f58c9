//! Property-based checks of the crate-level invariants.

use proptest::prelude::*;

use scorepath_core::analysis::{ConePair, SlopeBounds};
use scorepath_core::grid::GridSpec;
use scorepath_core::kinematics::{
    simulate, ControllerParams, Event, SimConfig, State, DEFAULT_D_STAR,
};
use scorepath_core::score::{AffineStBSF, ScoreFunction};
use scorepath_core::sensor::{render_depth, Corridor, SensorConfig, MIN_RANGE};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Node coordinates round-trip through nearest-node lookup.
    #[test]
    fn grid_nearest_roundtrip(i in 0usize..21, j in 0usize..17) {
        let grid = GridSpec::symmetric(1.2, 21, 1.0, 17);
        let (theta, d) = (grid.theta_at(i), grid.d_at(j));
        prop_assert_eq!(grid.nearest(theta, d), (i, j));
    }

    /// The affine/cubic family satisfies the score conditions everywhere:
    /// F(0,0) = 0 and both partials strictly negative.
    #[test]
    fn affine_family_satisfies_conditions(
        a in 0.1f64..5.0,
        b in 0.1f64..5.0,
        c3 in 0.0f64..2.0,
        theta in -1.5f64..1.5,
        d in -2.0f64..2.0,
    ) {
        let f = AffineStBSF::new(a, b, c3).unwrap();
        prop_assert_eq!(f.value(0.0, 0.0), 0.0);
        let (ft, fd) = f.partials(&State::planar(theta, d)).unwrap();
        prop_assert!(ft < 0.0);
        prop_assert!(fd < 0.0);
        // Exact slope identity h' = -Ftheta/Fd on the curve.
        let h = f.h(theta);
        let (ft_c, fd_c) = f.partials(&State::planar(theta, h)).unwrap();
        prop_assert!((f.h_prime(theta) + ft_c / fd_c).abs() < 1e-12);
    }

    /// Noise-free scans stay within the physical range band.
    #[test]
    fn scan_ranges_bounded(
        theta in -1.5f64..1.5,
        d_frac in -0.95f64..0.95,
        seed in any::<u64>(),
    ) {
        let corridor = Corridor::default();
        let cfg = SensorConfig::default();
        let scan = render_depth(
            &corridor,
            &cfg,
            &State::planar(theta, d_frac * corridor.w_half()),
            seed,
        )
        .unwrap();
        prop_assert_eq!(scan.ranges.len(), cfg.n_rays);
        for &r in &scan.ranges {
            prop_assert!(r >= MIN_RANGE && r <= cfg.max_range);
        }
    }

    /// Cone membership agrees with the sign of the membership slack.
    #[test]
    fn cone_membership_matches_slack(
        inf_slope in 0.3f64..1.5,
        width in 0.05f64..0.5,
        theta in -1.5f64..1.5,
        d in -1.3f64..1.3,
    ) {
        let bounds = SlopeBounds {
            inf_slope,
            sup_slope: inf_slope + width,
            margin: 0.05,
            l_inner: inf_slope - 0.05,
            l_outer: inf_slope + width + 0.05,
        };
        let cones = ConePair::new(&bounds, DEFAULT_D_STAR).unwrap();
        let slack = cones.membership_slack(theta, d);
        prop_assert_eq!(cones.contains(theta, d), slack >= 0.0);
        // The zero-curve anchor: the origin belongs to both cones.
        prop_assert!(cones.contains(0.0, 0.0));
    }

    /// Every recorded crash corresponds to an actual bound violation at the
    /// final sample, and convergence means the final state is in the dwell
    /// box; no other event sources exist.
    #[test]
    fn events_match_final_state(
        theta0 in -1.2f64..1.2,
        d0 in -1.0f64..1.0,
        ratio in 0.05f64..20.0,
    ) {
        let f = AffineStBSF::new(1.0, 1.0, 0.0).unwrap();
        let params = ControllerParams::new(5e-5, ratio, 1.0).unwrap();
        let cfg = SimConfig { t_max: 5.0, ..SimConfig::default() };
        let traj = simulate(&State::planar(theta0, d0), &f, &params, &cfg).unwrap();
        let last = traj.samples.last().unwrap().state;
        match traj.event {
            Event::Crashed => prop_assert!(
                last.d.abs() >= cfg.d_star
                    || last.theta.abs() >= core::f64::consts::FRAC_PI_2
                    || !f.eval(&last).unwrap().is_finite()
            ),
            Event::Converged => prop_assert!(
                last.d.abs() < cfg.conv_d && last.theta.abs() < cfg.conv_theta
            ),
            Event::Timeout => prop_assert!((traj.t_end() - cfg.t_max).abs() <= cfg.dt),
            Event::Singularity => prop_assert!(false, "straight path cannot hit a singularity"),
        }
    }

    /// Simulation is a pure function of its inputs.
    #[test]
    fn simulation_deterministic(theta0 in -1.0f64..1.0, d0 in -0.9f64..0.9) {
        let f = AffineStBSF::new(1.0, 1.0, 0.3).unwrap();
        let params = ControllerParams::new(5e-5, 0.5, 1.0).unwrap();
        let cfg = SimConfig { t_max: 3.0, ..SimConfig::default() };
        let a = simulate(&State::planar(theta0, d0), &f, &params, &cfg).unwrap();
        let b = simulate(&State::planar(theta0, d0), &f, &params, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
