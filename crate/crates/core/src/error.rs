//! Error type shared across the crate.

use core::fmt;

/// Errors produced by simulation, scoring, learning, verification, and
/// certification routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `1 - rho(s) d` came within the singularity margin of zero.
    Singularity { s: f64, d: f64 },
    /// A vector had a different length than the consumer expected.
    DimensionMismatch { expected: usize, got: usize },
    /// A pose was rendered outside the corridor walls.
    PoseOutsideCorridor { d: f64, w_half: f64 },
    /// Grid exclusion removed every sample.
    EmptyDataset,
    /// Training data contains only one class.
    SingleClassData,
    /// A score function could not be evaluated at a grid node.
    EvaluationFailure { theta: f64, d: f64 },
    /// The verification grid does not contain the origin.
    OriginOutsideGrid,
    /// The implicit-curve root left the admissible band at this heading.
    NoBracket { theta: f64 },
    /// The slope margin is at least as large as the smallest curve slope.
    DegenerateSlopes { inf_slope: f64, margin: f64 },
    /// The boundary-flux limit is not positive for the given slope.
    NonPositiveDelta { delta: f64 },
    /// A ratio-bound sample had the wrong sign along the cone line.
    NegativeRatioSample { theta: f64, ratio: f64 },
    /// Lateral sweep at |theta| = pi/2 cannot distinguish scores.
    InconclusiveProtocol,
    /// A structural precondition on configuration or parameters failed.
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Singularity { s, d } => {
                write!(f, "kinematic singularity: 1 - rho(s)d ~ 0 at s={s}, d={d}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::PoseOutsideCorridor { d, w_half } => {
                write!(f, "pose outside corridor: |d|={} >= w_half={w_half}", d.abs())
            }
            Error::EmptyDataset => write!(f, "exclusion margin removed every sample"),
            Error::SingleClassData => write!(f, "training data contains a single class"),
            Error::EvaluationFailure { theta, d } => {
                write!(f, "score evaluation failed at (theta={theta}, d={d})")
            }
            Error::OriginOutsideGrid => write!(f, "verification grid does not contain the origin"),
            Error::NoBracket { theta } => {
                write!(f, "no root bracket inside |d| <= d_star at theta={theta}")
            }
            Error::DegenerateSlopes { inf_slope, margin } => {
                write!(f, "slope margin {margin} >= smallest slope magnitude {inf_slope}")
            }
            Error::NonPositiveDelta { delta } => {
                write!(f, "boundary-flux limit is not positive: delta={delta}")
            }
            Error::NegativeRatioSample { theta, ratio } => {
                write!(f, "ratio sample has wrong sign at theta={theta}: {ratio}")
            }
            Error::InconclusiveProtocol => {
                write!(f, "lateral sweep at |theta| = pi/2 is inconclusive")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
