//! Level-1 raster products.

use serde::{Deserialize, Serialize};

use super::config::{Kernel, Level};
use crate::error::{domain, Result};
use crate::geom::{GroundPoint, LccGrid, Mode, SensorGeometry, Vec3};

/// Raster value of pixels no sample reached.
pub const FILL_VALUE: f32 = -999.0;

/// Quality-mask bits.
pub const QA_UNFILLED: u8 = 1;
pub const QA_GEOMETRY: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridDef {
    /// Virtual-linear-sensor grid: scan `s` at `start_time + s·line_period`.
    L1b { start_time: f64, line_period: f64, look_row: f64 },
    L1c(LccGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMetadata {
    pub mode: Mode,
    pub start_time: f64,
    pub end_time: f64,
    pub frames: usize,
    pub kernel: Kernel,
    pub sigma: f64,
    pub calibration_version: String,
    pub sensor: SensorGeometry,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductGrid {
    pub level: Level,
    pub grid: GridDef,
    pub rows: usize,
    pub cols: usize,
    pub bands: Vec<u8>,
    /// Per band, row-major radiance.
    pub radiance: Vec<Vec<f32>>,
    /// Per band, contributing-frame count.
    pub sample_count: Vec<Vec<u16>>,
    /// Per band, quality bits.
    pub quality: Vec<Vec<u8>>,
    /// Per-pixel geodetic latitude/longitude (deg).
    pub lat: Vec<f64>,
    pub lon: Vec<f64>,
    pub metadata: ProductMetadata,
}

impl ProductGrid {
    /// An unfilled product.
    pub fn empty(level: Level, grid: GridDef, rows: usize, cols: usize, bands: &[u8], metadata: ProductMetadata) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(domain("output grid has zero area"));
        }
        if bands.is_empty() {
            return Err(domain("output needs at least one band"));
        }
        let n = rows * cols;
        Ok(ProductGrid {
            level,
            grid,
            rows,
            cols,
            bands: bands.to_vec(),
            radiance: vec![vec![FILL_VALUE; n]; bands.len()],
            sample_count: vec![vec![0; n]; bands.len()],
            quality: vec![vec![QA_UNFILLED; n]; bands.len()],
            lat: vec![f64::NAN; n],
            lon: vec![f64::NAN; n],
            metadata,
        })
    }

    pub fn band_index(&self, band: u8) -> Option<usize> {
        self.bands.iter().position(|&b| b == band)
    }

    pub fn band_or_err(&self, band: u8) -> Result<usize> {
        self.band_index(band).ok_or_else(|| domain(format!("product has no band {band}")))
    }

    pub fn is_filled(&self, bi: usize, idx: usize) -> bool {
        self.quality[bi][idx] & QA_UNFILLED == 0
    }

    /// Radiance as f64 with unfilled pixels as NaN.
    pub fn band_f64(&self, bi: usize) -> Vec<f64> {
        self.radiance[bi]
            .iter()
            .zip(&self.quality[bi])
            .map(|(&v, &q)| if q & QA_UNFILLED == 0 { v as f64 } else { f64::NAN })
            .collect()
    }

    pub fn ground(&self, idx: usize) -> Option<GroundPoint> {
        let (lat, lon) = (self.lat[idx], self.lon[idx]);
        (lat.is_finite() && lon.is_finite()).then(|| GroundPoint::new(lat, lon, self.metadata.height))
    }

    pub fn ground_ecef(&self, idx: usize) -> Option<Vec3> {
        self.ground(idx).map(|g| g.to_ecef())
    }

    /// Bounding rectangle `(row0, col0, rows, cols)` of pixels filled in every band.
    pub fn filled_window(&self) -> Option<(usize, usize, usize, usize)> {
        let mut r0 = usize::MAX;
        let mut r1 = 0;
        let mut c0 = usize::MAX;
        let mut c1 = 0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let idx = i * self.cols + j;
                if (0..self.bands.len()).all(|b| self.is_filled(b, idx)) {
                    r0 = r0.min(i);
                    r1 = r1.max(i);
                    c0 = c0.min(j);
                    c1 = c1.max(j);
                }
            }
        }
        (r0 != usize::MAX).then(|| (r0, c0, r1 - r0 + 1, c1 - c0 + 1))
    }
}
