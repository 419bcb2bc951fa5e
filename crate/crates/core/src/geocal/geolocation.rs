//! Geolocation residuals against a reference image and their conversion to
//! attitude corrections.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{dense_match_coarse_fine, MatchOptions, Raster, TiePoint};
use super::stats::{median, percentile, ErrorSample, ErrorStats};
use super::{fit_cubic, MAX_BIAS};
use crate::error::{domain, Error, Result};
use crate::geom::ellipsoid::enu_basis;
use crate::geom::{Camera, GroundPoint, LookCorrection, Platform, SensorGeometry, Vec3};
use crate::tdi::{GridDef, ProductGrid};

fn igfov_ground(sensor: &SensorGeometry, altitude: f64) -> f64 {
    sensor.pixel_pitch * 1e-6 / (sensor.focal_length * 1e-3) * altitude
}

/// Small-angle conversion of detector-pixel offsets `(along, across)` to
/// `(roll, pitch)` via the nadir ground IFOV.
pub fn offsets_to_angles(along: f64, across: f64, sensor: &SensorGeometry, altitude: f64) -> (f64, f64) {
    let g = igfov_ground(sensor, altitude);
    ((across * g / altitude).atan(), (along * g / altitude).atan())
}

/// Inverse of [`offsets_to_angles`]; returns `(along, across)`.
pub fn angles_to_offsets(roll: f64, pitch: f64, sensor: &SensorGeometry, altitude: f64) -> (f64, f64) {
    let g = igfov_ground(sensor, altitude);
    (pitch.tan() * altitude / g, roll.tan() * altitude / g)
}

/// Acquisition time and physical detector position that imaged a product pixel.
pub fn pixel_geometry(product: &ProductGrid, platform: &Platform, i: usize, j: usize) -> Option<(f64, f64, f64)> {
    let mode = product.metadata.mode;
    let base = mode.base_scans(&product.metadata.sensor) as f64;
    match &product.grid {
        GridDef::L1b { start_time, line_period, look_row } => {
            Some((start_time + i as f64 * line_period, mode.physical_row(*look_row), mode.physical_col(j as f64)))
        }
        GridDef::L1c(_) => {
            let g = product.ground(i * product.cols + j)?;
            let row = mode.physical_row((base - 1.0) / 2.0);
            let pad = 30.0;
            platform
                .ground_to_pixel(&g, (product.metadata.start_time - pad, product.metadata.end_time + pad), row)
                .ok()
        }
    }
}

fn enu2(p: &Vec3, at: &GroundPoint) -> Vector2<f64> {
    let (e, n, _) = enu_basis(at.lat.to_radians(), at.lon.to_radians());
    Vector2::new(p.dot(&e), p.dot(&n))
}

/// Ground displacement (east, north in m) per pixel step in row and column,
/// as columns of the returned matrix, from the product's geolocation layers.
pub fn pixel_jacobian(product: &ProductGrid, i: usize, j: usize) -> Option<Matrix2<f64>> {
    let at = product.ground(i * product.cols + j)?;
    let p = |i: isize, j: isize| -> Option<Vec3> {
        if i < 0 || j < 0 || i as usize >= product.rows || j as usize >= product.cols {
            return None;
        }
        product.ground_ecef(i as usize * product.cols + j as usize)
    };
    let diff = |a: (isize, isize), b: (isize, isize)| -> Option<Vec3> {
        match (p(a.0, a.1), p(b.0, b.1)) {
            (Some(x), Some(y)) => Some((x - y) / 2.0),
            _ => None,
        }
    };
    let (ii, jj) = (i as isize, j as isize);
    let centre = p(ii, jj)?;
    let d_row = diff((ii + 1, jj), (ii - 1, jj))
        .or_else(|| p(ii + 1, jj).map(|x| x - centre))
        .or_else(|| p(ii - 1, jj).map(|x| centre - x))?;
    let d_col = diff((ii, jj + 1), (ii, jj - 1))
        .or_else(|| p(ii, jj + 1).map(|x| x - centre))
        .or_else(|| p(ii, jj - 1).map(|x| centre - x))?;
    Some(Matrix2::from_columns(&[enu2(&d_row, &at), enu2(&d_col, &at)]))
}

/// Ground displacement (east, north in m) per radian of roll and pitch
/// correction at one detector position.
pub fn attitude_sensitivity(platform: &Platform, t: f64, row: f64, col: f64) -> Option<Matrix2<f64>> {
    const DELTA: f64 = 1e-6;
    let pose = platform.pose_at(t);
    let at = GroundPoint::from_ecef(&pose.pixel_to_ecef(&platform.camera, row, col, platform.height).ok()?);
    let shifted = |c: LookCorrection| -> Option<Vec3> {
        let cam = Camera::new(platform.camera.sensor.clone(), platform.camera.correction.compose(&c));
        pose.pixel_to_ecef(&cam, row, col, platform.height).ok()
    };
    let column = |roll: f64, pitch: f64| -> Option<Vector2<f64>> {
        let plus = shifted(LookCorrection::constant(roll, pitch))?;
        let minus = shifted(LookCorrection::constant(-roll, -pitch))?;
        Some(enu2(&((plus - minus) / (2.0 * DELTA)), &at))
    };
    Some(Matrix2::from_columns(&[column(DELTA, 0.0)?, column(0.0, DELTA)?]))
}

/// One tie point expressed as a ground error and the look correction that
/// removes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub row: f64,
    pub col: f64,
    /// Normalized field coordinate of the detector column.
    pub xi: f64,
    /// Image offsets (product pixels).
    pub d_along: f64,
    pub d_across: f64,
    /// Geolocation error (claimed − true) along and across the product axes (m).
    pub along_m: f64,
    pub across_m: f64,
    pub east: f64,
    pub north: f64,
    /// Correction (rad) that cancels the error at this point.
    pub roll: f64,
    pub pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualField {
    pub band: u8,
    pub points: Vec<Residual>,
}

/// Converts tie points between a product band (target) and a reference
/// aligned to the product's claimed geolocation into ground errors and the
/// roll/pitch that cancels each one.
pub fn residuals_from_tiepoints(product: &ProductGrid, platform: &Platform, band: u8, tiepoints: &[TiePoint]) -> ResidualField {
    let sensor = &product.metadata.sensor;
    let points = tiepoints
        .par_iter()
        .filter_map(|tp| {
            let (i, j) = (tp.ref_row as usize, tp.ref_col as usize);
            let jac = pixel_jacobian(product, i, j)?;
            let (t, row, col) = pixel_geometry(product, platform, i, j)?;
            let s = attitude_sensitivity(platform, t, row, col)?;
            let d = Vector2::new(tp.d_along, tp.d_across);
            let err = jac * d;
            let c = -(s.try_inverse()? * err);
            Some(Residual {
                row: tp.ref_row,
                col: tp.ref_col,
                xi: sensor.field_coordinate(col),
                d_along: d[0],
                d_across: d[1],
                along_m: d[0] * jac.column(0).norm(),
                across_m: d[1] * jac.column(1).norm(),
                east: err[0],
                north: err[1],
                roll: c[0],
                pitch: c[1],
            })
        })
        .collect();
    ResidualField { band, points }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeolocationOptions {
    pub matching: MatchOptions,
    /// Coarse search radius (px) for large initial errors.
    pub radius: usize,
}

impl Default for GeolocationOptions {
    fn default() -> Self {
        GeolocationOptions { matching: MatchOptions { search: 4, ..MatchOptions::default() }, radius: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeolocationReport {
    /// Errors in metres.
    pub metres: ErrorStats,
    /// Errors in product pixels.
    pub pixels: ErrorStats,
    pub field: ResidualField,
}

/// Measures the geolocation error of one product band against a reference
/// image resampled at the product's claimed geolocation.
pub fn estimate_geolocation_error(
    product: &ProductGrid,
    reference: &Raster,
    band: u8,
    platform: &Platform,
    opts: &GeolocationOptions,
) -> Result<GeolocationReport> {
    let target = Raster::from_product(product, band)?;
    let tps = dense_match_coarse_fine(reference, &target, opts.radius, &opts.matching)?;
    let field = residuals_from_tiepoints(product, platform, band, &tps);
    if field.points.len() < opts.matching.min_points {
        return Err(Error::InsufficientTiePoints { found: field.points.len(), required: opts.matching.min_points });
    }
    let metres: Vec<ErrorSample> =
        field.points.iter().map(|r| ErrorSample { col: r.col, along: r.along_m, across: r.across_m }).collect();
    let pixels: Vec<ErrorSample> =
        field.points.iter().map(|r| ErrorSample { col: r.col, along: r.d_along, across: r.d_across }).collect();
    Ok(GeolocationReport { metres: ErrorStats::from_samples(&metres)?, pixels: ErrorStats::from_samples(&pixels)?, field })
}

/// Alignment bias plus interior calibration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AttitudeCorrection {
    pub roll: f64,
    pub pitch: f64,
    /// Column-dependent remainder; its constant terms are not part of the bias.
    pub interior: LookCorrection,
    /// 90th percentile (rad) of the point misfits about the fitted model.
    pub residual: f64,
}

impl AttitudeCorrection {
    pub fn look_correction(&self) -> LookCorrection {
        LookCorrection::constant(self.roll, self.pitch).compose(&self.interior)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationOptions {
    pub min_points: usize,
    /// Required fraction of the field of view spanned by the points.
    pub min_coverage: f64,
    /// Field bins for the interior fit.
    pub bins: usize,
    pub interior: bool,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions { min_points: 100, min_coverage: 0.8, bins: 16, interior: true }
    }
}

/// Per-bin medians over the normalized field `[-1, 1]`; empty bins are
/// omitted.
pub(crate) fn bin_medians(xi: &[f64], values: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let mut groups = vec![Vec::new(); bins];
    for (&x, &v) in xi.iter().zip(values) {
        let b = (((x + 1.0) / 2.0 * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
        groups[b].push((x, v));
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let xs: Vec<f64> = g.iter().map(|p| p.0).collect();
            let vs: Vec<f64> = g.iter().map(|p| p.1).collect();
            (median(&xs), median(&vs))
        })
        .collect()
}

/// Bias as the median of per-point corrections, interior calibration as a
/// cubic over the field fitted to binned remainders.
pub fn calibrate_geolocation(field: &ResidualField, opts: &CalibrationOptions) -> Result<AttitudeCorrection> {
    let n = field.points.len();
    if n < opts.min_points {
        return Err(Error::InsufficientTiePoints { found: n, required: opts.min_points });
    }
    let xi: Vec<f64> = field.points.iter().map(|r| r.xi).collect();
    let lo = xi.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo) / 2.0 < opts.min_coverage {
        return Err(Error::InsufficientData(format!(
            "residuals span {:.0}% of the swath, {:.0}% required",
            50.0 * (hi - lo),
            100.0 * opts.min_coverage
        )));
    }
    let roll: Vec<f64> = field.points.iter().map(|r| r.roll).collect();
    let pitch: Vec<f64> = field.points.iter().map(|r| r.pitch).collect();
    let (rb, pb) = (median(&roll), median(&pitch));
    if rb.abs() >= MAX_BIAS || pb.abs() >= MAX_BIAS {
        return Err(Error::CalibrationRejected(format!("bias ({rb:.3e}, {pb:.3e}) rad exceeds sanity bound")));
    }
    let mut interior = LookCorrection::default();
    if opts.interior {
        let fit = |v: &[f64], bias: f64| -> [f64; 4] {
            let rem: Vec<f64> = v.iter().map(|x| x - bias).collect();
            let (bx, by): (Vec<f64>, Vec<f64>) = bin_medians(&xi, &rem, opts.bins.max(1)).into_iter().unzip();
            fit_cubic(&bx, &by)
        };
        interior = LookCorrection { roll: fit(&roll, rb), pitch: fit(&pitch, pb) };
    }
    let model = LookCorrection::constant(rb, pb).compose(&interior);
    let misfit: Vec<f64> = field
        .points
        .iter()
        .map(|r| {
            let (mr, mp) = model.angles(r.xi);
            (r.roll - mr).hypot(r.pitch - mp)
        })
        .collect();
    let magnitude: Vec<f64> = field.points.iter().map(|r| r.roll.hypot(r.pitch)).collect();
    let spread = percentile(&misfit, 0.9);
    let level = median(&magnitude);
    if spread > 10.0 * level && spread > 0.0 {
        return Err(Error::CalibrationRejected(format!(
            "residual spread {spread:.3e} rad exceeds ten times the median {level:.3e} rad"
        )));
    }
    if !(rb.is_finite() && pb.is_finite()) {
        return Err(domain("non-finite correction"));
    }
    Ok(AttitudeCorrection { roll: rb, pitch: pb, interior, residual: spread })
}
