//! Run configuration, read from TOML.
//!
//! ```toml
//! q_r = 20
//! q_b = [30, 33, 36, 39, 42, 45]
//! components = 5
//! gamma = 0.4
//! stride = 10
//! propagation_radius = 0.1
//!
//! [grid]
//! x_min = -50.0
//! y_min = -50.0
//! cell_size = 0.5
//! cols = 200
//! rows = 200
//!
//! [plane]
//! pixel_pitch = 0.2
//! width = 512
//! height = 512
//! ```
//!
//! Every key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::{PlaneConfig, MAX_QP};
use crate::roi::{GridGeometry, RoiParams, DEFAULT_PROPAGATION_RADIUS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q_r: i32,
    pub q_b: Vec<i32>,
    pub components: usize,
    pub gamma: f64,
    /// RoI is detected on every `stride`-th frame and propagated in between.
    pub stride: usize,
    pub propagation_radius: f64,
    pub grid: GridGeometry,
    pub plane: PlaneConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q_r: 20,
            q_b: vec![30, 33, 36, 39, 42, 45],
            components: 5,
            gamma: 0.4,
            stride: 10,
            propagation_radius: DEFAULT_PROPAGATION_RADIUS,
            grid: GridGeometry::default(),
            plane: PlaneConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for &q in std::iter::once(&self.q_r).chain(&self.q_b) {
            if !(0..=i32::from(MAX_QP)).contains(&q) {
                return Err(Error::QpOutOfRange(q));
            }
        }
        if self.q_b.is_empty() {
            return Err(Error::invalid("q_b list is empty"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if self.stride == 0 || self.components == 0 {
            return Err(Error::invalid("stride and components must be at least 1"));
        }
        if !(self.propagation_radius > 0.0 && self.propagation_radius.is_finite()) {
            return Err(Error::invalid("propagation radius must be positive"));
        }
        self.grid.validate()?;
        self.plane.validate()
    }

    pub fn roi_params(&self) -> RoiParams {
        RoiParams {
            components: self.components,
            gamma: self.gamma,
            grid: self.grid,
            ..RoiParams::default()
        }
    }
}
