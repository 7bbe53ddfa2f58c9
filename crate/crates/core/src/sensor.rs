//! Synthetic depth sensor: a 2D raycast scanner in an infinite straight
//! corridor. The measurement depends only on `(theta, d)` (and on `s` only
//! when a glass-pane perturbation is configured), so it realizes the sensor
//! map the score abstraction expects.

use alloc::vec::Vec;

use libm::{cos, sin};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::State;
use crate::score::SensorMap;

/// Smallest representable range; returned ranges stay in `(0, max_range]`.
pub const MIN_RANGE: f64 = 1e-6;

/// Corridor wall, named for the sign of `d` at the wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallSide {
    /// Wall at `d = +w_half`.
    Left,
    /// Wall at `d = -w_half`.
    Right,
}

/// A wall interval that returns no depth echo (rays read `max_range`),
/// modeling a glass pane. Used only in robustness experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlassPane {
    pub side: WallSide,
    pub s_start: f64,
    pub s_end: f64,
}

/// Straight corridor of the given width, walls at `d = +-width/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Corridor {
    pub width: f64,
    #[serde(default)]
    pub glass: Option<GlassPane>,
}

/// Default corridor width: 8 ft in meters.
pub const DEFAULT_WIDTH: f64 = 2.44;

impl Default for Corridor {
    fn default() -> Self {
        Corridor { width: DEFAULT_WIDTH, glass: None }
    }
}

impl Corridor {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidConfig("corridor width must be > 0"));
        }
        Ok(Corridor { width, glass: None })
    }

    pub fn w_half(&self) -> f64 {
        self.width / 2.0
    }
}

/// Scanner geometry and noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    pub n_rays: usize,
    /// Field of view (rad), rays evenly spaced over `[-fov/2, +fov/2]`.
    pub fov: f64,
    pub max_range: f64,
    /// Gaussian range noise sigma (m); 0 for deterministic scans.
    pub noise_sigma: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig { n_rays: 64, fov: 1.5, max_range: 10.0, noise_sigma: 0.0 }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rays < 2 {
            return Err(Error::InvalidConfig("n_rays must be >= 2"));
        }
        if !(self.fov > 0.0 && self.fov < core::f64::consts::PI) {
            return Err(Error::InvalidConfig("fov must be in (0, pi)"));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::InvalidConfig("max_range must be > 0"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0"));
        }
        Ok(())
    }

    /// Ray offset `phi_i` from the heading.
    pub fn phi(&self, i: usize) -> f64 {
        -self.fov / 2.0 + self.fov * i as f64 / (self.n_rays - 1) as f64
    }
}

/// A range vector, one entry per ray, each in `(0, max_range]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScan {
    pub ranges: Vec<f64>,
}

// Per-call RNG stream derived from the seed and the pose bits, so concurrent
// rendering stays deterministic.
fn noise_stream(seed: u64, state: &State) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for bits in [state.theta.to_bits(), state.d.to_bits(), state.s.to_bits()] {
        h ^= bits;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 27;
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Render a depth scan at the given pose.
///
/// Ray `i` points at world angle `theta + phi_i`. A ray with positive
/// lateral component hits the wall at `d = +w_half` with range
/// `(w_half - d) / sin(theta + phi_i)`, mirrored for the other wall; ranges
/// beyond `max_range` (including parallel rays) clamp to `max_range`.
pub fn render_depth(
    corridor: &Corridor,
    cfg: &SensorConfig,
    state: &State,
    seed: u64,
) -> Result<DepthScan> {
    cfg.validate()?;
    let w_half = corridor.w_half();
    if state.d.abs() >= w_half {
        return Err(Error::PoseOutsideCorridor { d: state.d, w_half });
    }

    let mut ranges = Vec::with_capacity(cfg.n_rays);
    for i in 0..cfg.n_rays {
        let angle = state.theta + cfg.phi(i);
        let lateral = sin(angle);
        let (mut range, wall) = if lateral > 0.0 {
            ((w_half - state.d) / lateral, Some(WallSide::Left))
        } else if lateral < 0.0 {
            ((w_half + state.d) / -lateral, Some(WallSide::Right))
        } else {
            (cfg.max_range, None)
        };
        if let (Some(pane), Some(wall)) = (corridor.glass, wall) {
            if wall == pane.side && range <= cfg.max_range {
                let s_hit = state.s + range * cos(angle);
                if s_hit >= pane.s_start && s_hit <= pane.s_end {
                    range = cfg.max_range;
                }
            }
        }
        ranges.push(range.min(cfg.max_range));
    }

    if cfg.noise_sigma > 0.0 {
        let mut rng = noise_stream(seed, state);
        let normal = Normal::new(0.0, cfg.noise_sigma)
            .map_err(|_| Error::InvalidConfig("invalid noise sigma"))?;
        for r in &mut ranges {
            *r = (*r + normal.sample(&mut rng)).clamp(MIN_RANGE, cfg.max_range);
        }
    }

    Ok(DepthScan { ranges })
}

/// Deterministic sensor map (`sigma = 0`) over a corridor, as required by
/// verification and analysis.
#[derive(Debug, Clone, Copy)]
pub struct CorridorSensor {
    corridor: Corridor,
    cfg: SensorConfig,
}

/// Wrap a corridor scanner as a deterministic [`SensorMap`].
pub fn sensor_map(corridor: Corridor, cfg: SensorConfig) -> CorridorSensor {
    let cfg = SensorConfig { noise_sigma: 0.0, ..cfg };
    CorridorSensor { corridor, cfg }
}

impl CorridorSensor {
    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    pub fn config(&self) -> &SensorConfig {
        &self.cfg
    }
}

impl SensorMap for CorridorSensor {
    fn measure(&self, state: &State) -> Result<Vec<f64>> {
        Ok(render_depth(&self.corridor, &self.cfg, state, 0)?.ranges)
    }

    fn output_dim(&self) -> usize {
        self.cfg.n_rays
    }
}
