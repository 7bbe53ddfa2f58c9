//! Score-driven path following for unicycle robots.
//!
//! The controller maps a sensor measurement to a scalar score and the score
//! to forward and angular velocities. This crate provides the pieces needed
//! to build, check, and exercise such controllers:
//!
//! - [`kinematics`]: unicycle dynamics in local path coordinates, closed-loop
//!   vector field, fixed-step RK4 simulation with event detection
//! - [`score`]: score-function abstractions (state-based, measurement-based,
//!   and their composition through a sensor map)
//! - [`sensor`]: a synthetic 2D raycast depth scanner in a straight corridor
//! - [`learn`]: labeled dataset generation and deterministic linear SVM
//!   training whose decision-function argument is the measurement score
//! - [`verify`]: sample-based verification of the monotonicity conditions a
//!   state-based score must satisfy
//! - [`analysis`]: constructive stability certification (implicit zero curve,
//!   slope bounds, invariant cones, admissible velocity-ratio bound, Nagumo
//!   boundary and Lyapunov-decrease checks)
//! - [`experiments`]: batch sweeps, trajectory metrics, and the bang-bang
//!   baseline controller
//!
//! The crate is `no_std` compatible (with `alloc`); file formats, plotting,
//! and the CLI live in the companion `scorepath` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod kinematics;
pub mod learn;
pub mod score;
pub mod sensor;
pub mod verify;

pub use error::{Error, Result};
