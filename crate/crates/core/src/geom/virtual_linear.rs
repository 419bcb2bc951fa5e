//! The virtual linear sensor that defines the Level-1B output grid.
//!
//! Each output scan is one virtual line imaged through a fixed look row of
//! the frame camera; scans are spaced half a frame period apart so a single
//! frame of `n` binned rows spans the mode's base scan count.

use serde::{Deserialize, Serialize};

use super::model::Pose;
use super::sensor::{Camera, Mode};
use super::Vec3;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualLinearModel {
    pub mode: Mode,
    pub start_time: f64,
    pub line_period: f64,
    pub num_scans: usize,
    pub num_pixels: usize,
    /// Binned look row of the virtual line.
    pub look_row: f64,
    /// Body-frame unit look vector per output column.
    pub pointing: Vec<Vec3>,
}

/// `base + 2·(frames − 1)` with base 47 (LAC) / 13 (GAC) on the standard detector.
pub fn num_scans(mode: Mode, rows: usize, frames: usize) -> usize {
    let base = match mode {
        Mode::Lac => 2 * rows - 1,
        Mode::Gac => 2 * rows - 3,
    };
    base + 2 * frames.saturating_sub(1)
}

/// Builds the output-grid model from raw-frame start times.
pub fn build_virtual_linear_model(
    start_times: &[f64],
    frame_period: f64,
    mode: Mode,
    camera: &Camera,
) -> Result<VirtualLinearModel> {
    if start_times.is_empty() {
        return Err(domain("no raw frames"));
    }
    if start_times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Data("frame timestamps are not strictly increasing".into()));
    }
    if !(frame_period > 0.0) {
        return Err(domain("frame period must be positive"));
    }
    let sensor = &camera.sensor;
    let rows = mode.frame_rows(sensor);
    let cols = mode.frame_cols(sensor);
    let base = mode.base_scans(sensor);
    let look_row = (base as f64 - 1.0) / 2.0;
    let r = mode.physical_row(look_row);
    let pointing = (0..cols).map(|m| camera.look_unchecked(r, mode.physical_col(m as f64))).collect();
    Ok(VirtualLinearModel {
        mode,
        start_time: start_times[0],
        line_period: frame_period / 2.0,
        num_scans: num_scans(mode, rows, start_times.len()),
        num_pixels: cols,
        look_row,
        pointing,
    })
}

impl VirtualLinearModel {
    pub fn scan_time(&self, s: f64) -> f64 {
        self.start_time + s * self.line_period
    }

    /// Earth-fixed ground position of output pixel `(s, m)` seen from `pose`
    /// (which must be the pose at `scan_time(s)`).
    pub fn ground_ecef(&self, pose: &Pose, m: usize, height: f64) -> Result<Vec3> {
        let dir = pose.body_to_ecef * self.pointing[m];
        super::ellipsoid::intersect_height(&pose.position, &dir, height)
    }
}
