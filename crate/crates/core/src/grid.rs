//! Regular theta x d lattices shared by dataset generation and verification.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rectangular lattice over `(theta, d)`, row-major in theta then d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub n_d: usize,
}

impl GridSpec {
    /// Symmetric grid over `|theta| <= theta_lim`, `|d| <= d_lim`.
    pub fn symmetric(theta_lim: f64, n_theta: usize, d_lim: f64, n_d: usize) -> Self {
        GridSpec {
            theta_min: -theta_lim,
            theta_max: theta_lim,
            n_theta,
            d_min: -d_lim,
            d_max: d_lim,
            n_d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 2 || self.n_d < 2 {
            return Err(Error::InvalidConfig("grid needs at least 2 nodes per axis"));
        }
        if !(self.theta_max > self.theta_min) || !(self.d_max > self.d_min) {
            return Err(Error::InvalidConfig("grid bounds must be increasing"));
        }
        Ok(())
    }

    pub fn theta_at(&self, i: usize) -> f64 {
        self.theta_min
            + (self.theta_max - self.theta_min) * i as f64 / (self.n_theta - 1) as f64
    }

    pub fn d_at(&self, j: usize) -> f64 {
        self.d_min + (self.d_max - self.d_min) * j as f64 / (self.n_d - 1) as f64
    }

    pub fn h_theta(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n_theta - 1) as f64
    }

    pub fn h_d(&self) -> f64 {
        (self.d_max - self.d_min) / (self.n_d - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_d
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_d + j
    }

    /// All nodes, theta outer, d inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta {
            for j in 0..self.n_d {
                out.push((self.theta_at(i), self.d_at(j)));
            }
        }
        out
    }

    /// Indices of the node nearest `(theta, d)`.
    pub fn nearest(&self, theta: f64, d: f64) -> (usize, usize) {
        let clampi = |x: f64, n: usize| -> usize {
            let k = libm::round(x);
            if k <= 0.0 {
                0
            } else if k >= (n - 1) as f64 {
                n - 1
            } else {
                k as usize
            }
        };
        let fi = (theta - self.theta_min) / self.h_theta();
        let fj = (d - self.d_min) / self.h_d();
        (clampi(fi, self.n_theta), clampi(fj, self.n_d))
    }

    /// Whether `(theta, d)` lies inside the grid's bounding box.
    pub fn contains(&self, theta: f64, d: f64) -> bool {
        theta >= self.theta_min
            && theta <= self.theta_max
            && d >= self.d_min
            && d <= self.d_max
    }
}
