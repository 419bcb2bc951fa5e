use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::LccGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Exponential,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    L1b,
    L1c,
    /// Reserved; geophysical products are not produced.
    L2,
}

/// How the kernel's "distance" is measured from the ground offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Squared,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TdiConfig {
    /// Kernel width in output pixels.
    pub sigma: f64,
    /// Neighbourhood half-width across track (columns).
    pub wx: usize,
    /// Neighbourhood half-width along track (rows).
    pub wy: usize,
    pub kernel: Kernel,
    pub level: Level,
    pub normalize: bool,
    pub distance: Distance,
    /// L1C pixel size (m); defaults to the nadir sampling of the mode.
    pub pixel_size: Option<f64>,
    /// Fixed L1C grid, e.g. to put several passes on one raster.
    pub grid: Option<LccGrid>,
}

impl Default for TdiConfig {
    fn default() -> Self {
        TdiConfig {
            sigma: 0.5,
            wx: 1,
            wy: 1,
            kernel: Kernel::Exponential,
            level: Level::L1b,
            normalize: true,
            distance: Distance::Squared,
            pixel_size: None,
            grid: None,
        }
    }
}

impl TdiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(domain("sigma must be positive"));
        }
        if self.level == Level::L2 {
            return Err(domain("Level-2 products are not produced"));
        }
        Ok(())
    }
}
