//! Dataset generation and deterministic linear SVM training.
//!
//! Grid poses are labeled `sign(-theta - d)` (the mixed-unit rule kept
//! verbatim, with optional per-axis scales); near-boundary poses are
//! excluded. Training is Pegasos-style primal subgradient descent with a
//! `1/(lambda t)` step schedule, single-threaded and seeded so identical
//! inputs give bitwise-identical models.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kinematics::State;
use crate::score::{FeatureMeta, LinearScoreModel};
use crate::sensor::{render_depth, Corridor, DepthScan, SensorConfig};

/// Optional per-axis scales on the labeling rule `sign(-(kt theta + kd d))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelScales {
    pub theta: f64,
    pub d: f64,
}

impl Default for LabelScales {
    fn default() -> Self {
        LabelScales { theta: 1.0, d: 1.0 }
    }
}

impl LabelScales {
    /// Signed labeling quantity `-(kt theta + kd d)`; its sign is the label.
    pub fn rule(&self, theta: f64, d: f64) -> f64 {
        -(self.theta * theta + self.d * d)
    }
}

/// A ground-truth pose, its scan, and the derived class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    /// Used only for labeling and later verification, never as a feature.
    pub state: State,
    pub scan: DepthScan,
    pub label: i8,
}

/// Pegasos hyper-parameters; the learning rate is `1/(reg_lambda * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmHyperParams {
    pub reg_lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmHyperParams {
    fn default() -> Self {
        SvmHyperParams { reg_lambda: 1e-2, epochs: 300, seed: 7 }
    }
}

/// Render one scan per non-excluded grid pose, row-major theta then d.
/// Poses with `|rule| < exclusion_margin` are dropped as label noise.
pub fn generate_dataset(
    corridor: &Corridor,
    cfg: &SensorConfig,
    grid: &GridSpec,
    exclusion_margin: f64,
    scales: &LabelScales,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    grid.validate()?;
    if grid.theta_min <= -core::f64::consts::FRAC_PI_2
        || grid.theta_max >= core::f64::consts::FRAC_PI_2
    {
        return Err(Error::InvalidConfig("dataset grid must satisfy |theta| < pi/2"));
    }
    let d_lim = 0.8 * corridor.w_half();
    if grid.d_min < -d_lim - 1e-12 || grid.d_max > d_lim + 1e-12 {
        return Err(Error::InvalidConfig("dataset grid must satisfy |d| <= 0.8 w_half"));
    }

    let mut out = Vec::new();
    for (theta, d) in grid.points() {
        let rule = scales.rule(theta, d);
        if rule.abs() < exclusion_margin {
            continue;
        }
        let state = State::planar(theta, d);
        let scan = render_depth(corridor, cfg, &state, seed)?;
        out.push(LabeledSample { state, scan, label: if rule > 0.0 { 1 } else { -1 } });
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

/// A trained model together with its training accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: LinearScoreModel,
    pub train_accuracy: f64,
}

/// Train a linear SVM by Pegasos-style hinge-loss subgradient descent.
///
/// Features are the raw ranges standardized by the training-set mean and
/// standard deviation; the constants are stored in the model's
/// `feature_meta` so the deployed score is self-contained.
pub fn train_linear_svm(
    data: &[LabeledSample],
    hp: &SvmHyperParams,
    cfg: &SensorConfig,
) -> Result<TrainOutcome> {
    if !(hp.reg_lambda > 0.0) || hp.epochs < 1 {
        return Err(Error::InvalidConfig("need reg_lambda > 0 and epochs >= 1"));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.iter().all(|s| s.label > 0) || data.iter().all(|s| s.label < 0) {
        return Err(Error::SingleClassData);
    }
    let dim = data[0].scan.ranges.len();
    for s in data {
        if s.scan.ranges.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: s.scan.ranges.len() });
        }
    }

    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in data {
        for (m, &r) in mean.iter_mut().zip(&s.scan.ranges) {
            *m += r / n;
        }
    }
    let mut std = vec![0.0; dim];
    for s in data {
        for (v, (&r, &m)) in std.iter_mut().zip(s.scan.ranges.iter().zip(&mean)) {
            *v += (r - m) * (r - m) / n;
        }
    }
    for v in &mut std {
        *v = libm::sqrt(*v);
        if *v < 1e-12 {
            *v = 1.0; // constant feature: leave it centered at zero
        }
    }

    let features: Vec<Vec<f64>> = data
        .iter()
        .map(|s| {
            s.scan
                .ranges
                .iter()
                .zip(mean.iter().zip(&std))
                .map(|(&r, (&m, &v))| (r - m) / v)
                .collect()
        })
        .collect();

    let mut w = vec![0.0; dim];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut t = 0u64;
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            t += 1;
            let eta = 1.0 / (hp.reg_lambda * t as f64);
            let x = &features[idx];
            let y = data[idx].label as f64;
            let margin = y * (dot(&w, x) + bias);
            let shrink = 1.0 - eta * hp.reg_lambda;
            for wk in &mut w {
                *wk *= shrink;
            }
            if margin < 1.0 {
                for (wk, &xk) in w.iter_mut().zip(x) {
                    *wk += eta * y * xk;
                }
                bias += eta * y; // bias unregularized
            }
        }
    }

    let model = LinearScoreModel {
        version: 1,
        weights: w,
        bias,
        feature_meta: FeatureMeta {
            n_rays: cfg.n_rays,
            fov_rad: cfg.fov,
            max_range_m: cfg.max_range,
            mean,
            std,
        },
    };
    let report = evaluate_classifier(&model, data)?;
    Ok(TrainOutcome { model, train_accuracy: report.accuracy })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Classification accuracy and the histogram of signed margins
/// `label * score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub accuracy: f64,
    pub margin_min: f64,
    pub margin_max: f64,
    pub margin_hist: Vec<usize>,
}

pub const MARGIN_HIST_BINS: usize = 20;

/// Score every sample; predicted class is `sign(score)` with ties to `+1`.
pub fn evaluate_classifier(
    model: &LinearScoreModel,
    data: &[LabeledSample],
) -> Result<ClassifierReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut margins = Vec::with_capacity(data.len());
    let mut correct = 0usize;
    for s in data {
        let score = model.eval_linear(&s.scan.ranges)?;
        let predicted: i8 = if score >= 0.0 { 1 } else { -1 };
        if predicted == s.label {
            correct += 1;
        }
        margins.push(s.label as f64 * score);
    }
    let lo = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut hist = vec![0usize; MARGIN_HIST_BINS];
    let span = if hi > lo { hi - lo } else { 1.0 };
    for &m in &margins {
        let bin = (((m - lo) / span) * MARGIN_HIST_BINS as f64) as usize;
        hist[bin.min(MARGIN_HIST_BINS - 1)] += 1;
    }
    Ok(ClassifierReport {
        accuracy: correct as f64 / data.len() as f64,
        margin_min: lo,
        margin_max: hi,
        margin_hist: hist,
    })
}
