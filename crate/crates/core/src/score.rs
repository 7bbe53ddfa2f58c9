//! Score-function abstractions.
//!
//! A measurement score maps a raw sensor vector to a scalar; composing it
//! with a sensor map yields a state-based score whose monotonicity in
//! `(theta, d)` is what the stability analysis constrains. The affine/cubic
//! family provides closed-form scores (with exact partials and an exact zero
//! curve) used as oracles throughout.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::State;

/// A scalar score over states. Evaluation must be deterministic and total
/// on the declared domain.
pub trait ScoreFunction {
    fn eval(&self, state: &State) -> Result<f64>;

    /// Exact `(dF/dtheta, dF/dd)` when available in closed form. Verifiers
    /// use finite differences regardless; exact partials serve as oracles.
    fn partials(&self, _state: &State) -> Option<(f64, f64)> {
        None
    }
}

/// A scalar score over raw measurements.
pub trait MeasurementScore {
    fn score(&self, y: &[f64]) -> Result<f64>;
    fn input_dim(&self) -> usize;
}

/// Deterministic map from state to measurement vector.
pub trait SensorMap {
    fn measure(&self, state: &State) -> Result<Vec<f64>>;
    fn output_dim(&self) -> usize;
}

/// Analytic family `F = -a theta - b d - c3 theta^3` with `a, b > 0` and
/// `c3 >= 0`, so both partials are negative everywhere and `F(0,0) = 0`.
/// The cubic term makes the zero curve genuinely nonlinear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineStBSF {
    pub a: f64,
    pub b: f64,
    pub c3: f64,
}

impl AffineStBSF {
    pub fn new(a: f64, b: f64, c3: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || !(c3 >= 0.0) {
            return Err(Error::InvalidConfig("affine score needs a > 0, b > 0, c3 >= 0"));
        }
        Ok(AffineStBSF { a, b, c3 })
    }

    pub fn value(&self, theta: f64, d: f64) -> f64 {
        -self.a * theta - self.b * d - self.c3 * theta * theta * theta
    }

    /// Exact zero curve `h(theta) = -(a theta + c3 theta^3) / b`.
    pub fn h(&self, theta: f64) -> f64 {
        -(self.a * theta + self.c3 * theta * theta * theta) / self.b
    }

    /// Exact slope `h'(theta) = -(a + 3 c3 theta^2) / b`.
    pub fn h_prime(&self, theta: f64) -> f64 {
        -(self.a + 3.0 * self.c3 * theta * theta) / self.b
    }
}

impl ScoreFunction for AffineStBSF {
    fn eval(&self, state: &State) -> Result<f64> {
        Ok(self.value(state.theta, state.d))
    }

    fn partials(&self, state: &State) -> Option<(f64, f64)> {
        Some((-self.a - 3.0 * self.c3 * state.theta * state.theta, -self.b))
    }
}

/// Sensor geometry and standardization constants a linear model was trained
/// against, stored so the deployed score is self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub n_rays: usize,
    pub fov_rad: f64,
    pub max_range_m: f64,
    /// Per-feature training mean; empty means raw features.
    #[serde(default)]
    pub mean: Vec<f64>,
    /// Per-feature training standard deviation; empty means raw features.
    #[serde(default)]
    pub std: Vec<f64>,
}

/// Linear measurement score `F(y) = w . y_std + c`, the argument of a
/// trained classifier's sign function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScoreModel {
    pub version: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_meta: FeatureMeta,
}

impl LinearScoreModel {
    /// Evaluate `w . standardize(y) + c`.
    pub fn eval_linear(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: y.len(),
            });
        }
        let standardized = !self.feature_meta.mean.is_empty();
        if standardized
            && (self.feature_meta.mean.len() != y.len() || self.feature_meta.std.len() != y.len())
        {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                got: self.feature_meta.mean.len(),
            });
        }
        let mut acc = self.bias;
        for (k, (&w, &yk)) in self.weights.iter().zip(y).enumerate() {
            let feat = if standardized {
                (yk - self.feature_meta.mean[k]) / self.feature_meta.std[k]
            } else {
                yk
            };
            acc += w * feat;
        }
        Ok(acc)
    }
}

impl MeasurementScore for LinearScoreModel {
    fn score(&self, y: &[f64]) -> Result<f64> {
        self.eval_linear(y)
    }

    fn input_dim(&self) -> usize {
        self.weights.len()
    }
}

/// A measurement score composed with a sensor map: `F(x) = F~(H(x))`.
#[derive(Debug, Clone)]
pub struct Composed<S, M> {
    sebsf: S,
    sensor: M,
}

/// Compose a measurement score with a sensor map, checking dimensions.
pub fn compose<S: MeasurementScore, M: SensorMap>(sebsf: S, sensor: M) -> Result<Composed<S, M>> {
    if sebsf.input_dim() != sensor.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: sebsf.input_dim(),
            got: sensor.output_dim(),
        });
    }
    Ok(Composed { sebsf, sensor })
}

impl<S: MeasurementScore, M: SensorMap> Composed<S, M> {
    pub fn sebsf(&self) -> &S {
        &self.sebsf
    }

    pub fn sensor(&self) -> &M {
        &self.sensor
    }
}

impl<S: MeasurementScore, M: SensorMap> ScoreFunction for Composed<S, M> {
    fn eval(&self, state: &State) -> Result<f64> {
        let y = self.sensor.measure(state)?;
        self.sebsf.score(&y)
    }
}
