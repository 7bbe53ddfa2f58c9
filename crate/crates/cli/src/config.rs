//! JSON-configurable settings for every subcommand.
//!
//! Each config deserializes with `#[serde(default)]` throughout, so a config
//! file only needs the fields it overrides and `--config` may be omitted
//! entirely.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use scorepath_core::analysis::CertifyConfig;
use scorepath_core::experiments::SweepConfig;
use scorepath_core::grid::GridSpec;
use scorepath_core::kinematics::{ControllerParams, SimConfig, DEFAULT_D_STAR};
use scorepath_core::learn::{LabelScales, SvmHyperParams};
use scorepath_core::score::{compose, AffineStBSF, LinearScoreModel, ScoreFunction};
use scorepath_core::sensor::{sensor_map, Corridor, SensorConfig};

use crate::CliResult;

/// Where a state-based score comes from: the closed-form affine/cubic
/// family or a trained linear model composed with the corridor sensor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreSource {
    Affine {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
        #[serde(default)]
        c3: f64,
    },
    Model { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl Default for ScoreSource {
    fn default() -> Self {
        ScoreSource::Affine { a: 1.0, b: 1.0, c3: 0.0 }
    }
}

/// Build the score object a config points at. Model scores are composed
/// with the configured corridor sensor.
pub fn resolve_score(
    source: &ScoreSource,
    corridor: &Corridor,
    sensor: &SensorConfig,
) -> CliResult<Box<dyn ScoreFunction>> {
    match source {
        ScoreSource::Affine { a, b, c3 } => {
            Ok(Box::new(AffineStBSF::new(*a, *b, *c3).map_err(|e| e.to_string())?))
        }
        ScoreSource::Model { path } => {
            let model: LinearScoreModel = read_json(path)?;
            if model.version != 1 {
                return Err(format!("unsupported model version {} in {}", model.version, path.display()));
            }
            let composed = compose(model, sensor_map(*corridor, *sensor))
                .map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Box::new(composed))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    /// Poses `(theta, d)` to scan.
    pub poses: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            corridor: Corridor::default(),
            sensor: SensorConfig::default(),
            poses: vec![(0.0, 0.0), (0.3, -0.4), (-0.3, 0.4)],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    /// Sampling lattice; `None` means the standard training grid
    /// (41x41 over |theta| <= 1.2, |d| <= 0.8 w_half).
    pub grid: Option<GridSpec>,
    pub exclusion_margin: f64,
    pub scales: LabelScales,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            corridor: Corridor::default(),
            sensor: SensorConfig::default(),
            grid: None,
            exclusion_margin: 0.05,
            scales: LabelScales::default(),
            seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn effective_grid(&self) -> GridSpec {
        self.grid
            .unwrap_or_else(|| GridSpec::symmetric(1.2, 41, 0.8 * self.corridor.w_half(), 41))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Existing dataset CSV; when absent the dataset is generated in-process
    /// from `data`.
    pub dataset: Option<PathBuf>,
    pub data: DatasetConfig,
    pub hyper: SvmHyperParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyCliConfig {
    pub score: ScoreSource,
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    /// `None` means the default 41x41 verification grid.
    pub grid: Option<GridSpec>,
    pub strictness: f64,
    /// `None` means `0.1 * median |F|` over the grid.
    pub origin_tol: Option<f64>,
    pub d_star: f64,
}

impl Default for VerifyCliConfig {
    fn default() -> Self {
        VerifyCliConfig {
            score: ScoreSource::default(),
            corridor: Corridor::default(),
            sensor: SensorConfig::default(),
            grid: None,
            strictness: 0.0,
            origin_tol: None,
            d_star: DEFAULT_D_STAR,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveCliConfig {
    pub score: ScoreSource,
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    pub theta_lim: f64,
    pub n_samples: usize,
    pub tol: f64,
    pub d_star: f64,
    /// Slope margin as a fraction of `inf |h'|`.
    pub margin_frac: f64,
}

impl Default for CurveCliConfig {
    fn default() -> Self {
        CurveCliConfig {
            score: ScoreSource::default(),
            corridor: Corridor::default(),
            sensor: SensorConfig::default(),
            theta_lim: 1.2,
            n_samples: 241,
            tol: 1e-9,
            d_star: DEFAULT_D_STAR,
            margin_frac: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyCliConfig {
    pub score: ScoreSource,
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub certify: CertifyConfig,
}

impl Default for CertifyCliConfig {
    fn default() -> Self {
        CertifyCliConfig {
            score: ScoreSource::default(),
            corridor: Corridor::default(),
            sensor: SensorConfig::default(),
            alpha: 5e-5,
            beta: 0.045,
            gamma: 1.0,
            certify: CertifyConfig::default(),
        }
    }
}

impl CertifyCliConfig {
    pub fn params(&self) -> CliResult<ControllerParams> {
        ControllerParams::new(self.alpha, self.beta, self.gamma).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub score: ScoreSource,
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta0: f64,
    pub d0: f64,
    pub sim: SimConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            score: ScoreSource::default(),
            corridor: Corridor::default(),
            sensor: SensorConfig::default(),
            alpha: 5e-5,
            beta: 0.045,
            gamma: 1.0,
            theta0: 0.3,
            d0: -0.4,
            sim: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepCliConfig {
    pub score: ScoreSource,
    pub corridor: Corridor,
    pub sensor: SensorConfig,
    pub sweep: SweepConfig,
}

/// Load a config file, or the documented defaults when no path is given.
pub fn load_config<T: Default + DeserializeOwned>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => read_json(p),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
