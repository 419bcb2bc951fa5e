//! Raw and working-precision frames.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::{AttitudeProfile, Mode, OrbitElements, SensorGeometry};

/// A binned detector frame as transmitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFrame {
    /// Band number, 1–13.
    pub band: u8,
    pub mode: Mode,
    /// Frame sequence number within its stack.
    pub seq: usize,
    pub start_time: f64,
    pub rows: usize,
    pub cols: usize,
    /// Row-major counts.
    pub counts: Vec<u16>,
    /// Shielded-row counts, present on dark-cadence frames.
    pub dark_row: Option<Vec<u16>>,
    /// Payload tilt at acquisition (deg).
    pub tilt_angle: f64,
}

impl RawFrame {
    pub fn validate(&self) -> Result<()> {
        if !(1..=13).contains(&self.band) {
            return Err(domain(format!("band {} outside 1–13", self.band)));
        }
        if self.counts.len() != self.rows * self.cols {
            return Err(domain("count grid does not match frame dimensions"));
        }
        let max = self.mode.max_count();
        if self.counts.iter().any(|&c| c as u32 > max) {
            return Err(domain(format!("counts exceed the {}-bit range", self.mode.bit_depth())));
        }
        Ok(())
    }

    pub fn count(&self, row: usize, col: usize) -> u16 {
        self.counts[row * self.cols + col]
    }
}

/// A frame in floating working precision (dark-corrected counts or radiance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub band: u8,
    pub mode: Mode,
    pub seq: usize,
    pub start_time: f64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub tilt_angle: f64,
}

impl Frame {
    pub fn from_raw(raw: &RawFrame) -> Self {
        Frame {
            band: raw.band,
            mode: raw.mode,
            seq: raw.seq,
            start_time: raw.start_time,
            rows: raw.rows,
            cols: raw.cols,
            data: raw.counts.iter().map(|&c| c as f64).collect(),
            tilt_angle: raw.tilt_angle,
        }
    }

    pub fn filled(template: &RawFrame, value: f64) -> Self {
        Frame { data: vec![value; template.rows * template.cols], ..Frame::from_raw(template) }
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// A time-ordered acquisition: raw frames of one or more bands plus the
/// ancillary data needed to geolocate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameStack {
    pub mode: Mode,
    pub sensor: SensorGeometry,
    pub orbit: OrbitElements,
    /// Attitude telemetry (what the ground segment believes).
    pub attitude: AttitudeProfile,
    /// Seconds between consecutive frame starts.
    pub frame_period: f64,
    /// Integration time per frame (ms).
    pub integration_time: f64,
    /// Terrain height used for geolocation (m).
    pub height: f64,
    pub frames: Vec<RawFrame>,
}

impl FrameStack {
    pub fn bands(&self) -> Vec<u8> {
        let mut b: Vec<u8> = self.frames.iter().map(|f| f.band).collect();
        b.sort_unstable();
        b.dedup();
        b
    }

    /// Frames of one band in acquisition order.
    pub fn band_frames(&self, band: u8) -> Vec<&RawFrame> {
        let mut v: Vec<&RawFrame> = self.frames.iter().filter(|f| f.band == band).collect();
        v.sort_by(|a, b| a.seq.cmp(&b.seq));
        v
    }

    pub fn start_times(&self, band: u8) -> Vec<f64> {
        self.band_frames(band).iter().map(|f| f.start_time).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.orbit.validate()?;
        if self.frames.is_empty() {
            return Err(domain("frame stack is empty"));
        }
        let rows = self.mode.frame_rows(&self.sensor);
        let cols = self.mode.frame_cols(&self.sensor);
        for f in &self.frames {
            f.validate()?;
            if f.mode != self.mode || f.rows != rows || f.cols != cols {
                return Err(domain(format!("frame {} (band {}) does not match the stack mode", f.seq, f.band)));
            }
        }
        Ok(())
    }
}
