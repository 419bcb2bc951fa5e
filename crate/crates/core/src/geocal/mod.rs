//! Geometric calibration: tie-point matching, band-to-band registration,
//! geolocation bias and interior calibration, tilt drift.

pub mod bbr;
pub mod geolocation;
pub mod matching;
pub mod stats;
pub mod tilt;

use nalgebra::{DMatrix, DVector};

pub use bbr::{estimate_bbr, BbrOptions, BbrProfile, REFERENCE_BAND};
pub use geolocation::{
    angles_to_offsets, attitude_sensitivity, calibrate_geolocation, estimate_geolocation_error, offsets_to_angles,
    pixel_geometry, pixel_jacobian, residuals_from_tiepoints, AttitudeCorrection, CalibrationOptions,
    GeolocationOptions, GeolocationReport, Residual, ResidualField,
};
pub use matching::{dense_match, dense_match_coarse_fine, MatchOptions, Raster, TiePoint};
pub use stats::{bbr_stats, ce90, percentile, AxisStats, BbrStats, ErrorSample, ErrorStats};
pub use tilt::{fit_tilt_drift, TiltDriftModel};

/// Sanity bound on estimated alignment biases (rad).
pub const MAX_BIAS: f64 = 2.0 * std::f64::consts::PI / 180.0;

/// Least-squares polynomial of degree ≤ 3; the degree drops with the number
/// of points.
pub(crate) fn fit_cubic(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let n = xs.len().min(ys.len());
    let mut out = [0.0; 4];
    if n == 0 {
        return out;
    }
    let deg = (n - 1).min(3);
    let a = DMatrix::from_fn(n, deg + 1, |i, k| xs[i].powi(k as i32));
    let b = DVector::from_iterator(n, ys.iter().take(n).cloned());
    if let Ok(sol) = a.svd(true, true).solve(&b, 1e-12) {
        for k in 0..=deg {
            out[k] = sol[k];
        }
    }
    out
}
