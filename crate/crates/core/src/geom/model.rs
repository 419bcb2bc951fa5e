//! Pixel ↔ ground mapping through orbit, attitude and camera.

use super::attitude::{AttitudeProfile, AttitudeState};
use super::ellipsoid::{intersect_height, GroundPoint};
use super::orbit::{OrbitElements, OrbitState};
use super::sensor::{Camera, SensorGeometry};
use super::{rot_x, rot_y, rot_z, Mat3, Vec3};
use crate::error::{Error, Result};

/// Orbital reference frame as columns (along-track, across-track, nadir)
/// expressed in Earth-fixed axes.
pub fn orbital_frame(state: &OrbitState) -> Mat3 {
    let r = state.position;
    let v = state.inertial_velocity();
    let z = -r.normalize();
    let y = -r.cross(&v).normalize();
    let x = y.cross(&z);
    Mat3::from_columns(&[x, y, z])
}

/// Body-to-Earth-fixed rotation for 3-2-1 attitude angles.
pub fn body_to_ecef(state: &OrbitState, angles: [f64; 3]) -> Mat3 {
    let [roll, pitch, yaw] = angles;
    orbital_frame(state) * rot_z(yaw) * rot_y(pitch) * rot_x(roll)
}

/// Satellite position and orientation at one instant.
#[derive(Debug, Clone, Copy)]
pub struct Pose {
    pub time: f64,
    pub position: Vec3,
    pub body_to_ecef: Mat3,
}

impl Pose {
    pub fn new(state: &OrbitState, angles: [f64; 3]) -> Self {
        Pose { time: state.epoch, position: state.position, body_to_ecef: body_to_ecef(state, angles) }
    }

    /// Earth-fixed unit look direction of a pixel (no range check).
    pub fn direction(&self, camera: &Camera, row: f64, col: f64) -> Vec3 {
        self.body_to_ecef * camera.look_unchecked(row, col)
    }

    pub fn pixel_to_ecef(&self, camera: &Camera, row: f64, col: f64, height: f64) -> Result<Vec3> {
        let dir = self.body_to_ecef * camera.look_vector(row, col)?;
        intersect_height(&self.position, &dir, height)
    }

    pub fn pixel_to_ground(&self, camera: &Camera, row: f64, col: f64, height: f64) -> Result<GroundPoint> {
        Ok(GroundPoint::from_ecef(&self.pixel_to_ecef(camera, row, col, height)?))
    }

    /// Closed-form projection of an Earth-fixed point into physical detector
    /// coordinates at this pose. May fall outside the detector.
    pub fn project(&self, camera: &Camera, p: &Vec3) -> Option<(f64, f64)> {
        let body = self.body_to_ecef.transpose() * (p - self.position);
        camera.project(&body)
    }
}

/// Maps a pixel to the ground for a single orbit/attitude state.
pub fn pixel_to_ground(
    sensor: &SensorGeometry,
    orbit: &OrbitState,
    attitude: &AttitudeState,
    row: f64,
    col: f64,
    height: f64,
) -> Result<GroundPoint> {
    let camera = Camera::nominal(sensor.clone());
    Pose::new(orbit, attitude.angles_at(orbit.epoch)).pixel_to_ground(&camera, row, col, height)
}

/// Camera carried along an orbit with an attitude history, imaging a
/// constant-height Earth.
#[derive(Debug, Clone)]
pub struct Platform {
    pub camera: Camera,
    pub orbit: OrbitElements,
    pub attitude: AttitudeProfile,
    /// Terrain height above the ellipsoid (m).
    pub height: f64,
}

const MAX_ITERATIONS: usize = 50;
const TOLERANCE_PX: f64 = 1e-4;

impl Platform {
    pub fn pose_at(&self, t: f64) -> Pose {
        Pose::new(&self.orbit.state_at(t), self.attitude.angles_at(t))
    }

    pub fn pixel_to_ground(&self, t: f64, row: f64, col: f64) -> Result<GroundPoint> {
        self.pose_at(t).pixel_to_ground(&self.camera, row, col, self.height)
    }

    pub fn pixel_to_ecef(&self, t: f64, row: f64, col: f64) -> Result<Vec3> {
        self.pose_at(t).pixel_to_ecef(&self.camera, row, col, self.height)
    }

    /// Finds when and where a ground point crosses detector row `row` within
    /// `[t0, t1]`. Returns `(time, row, col)`.
    ///
    /// The image-space collinearity residual is driven to zero by damped
    /// Newton steps on time, with the column following in closed form, and
    /// bisection whenever Newton leaves the bracket.
    pub fn ground_to_pixel(&self, point: &GroundPoint, window: (f64, f64), row: f64) -> Result<(f64, f64, f64)> {
        let p = point.to_ecef();
        let (mut lo, mut hi) = window;
        let resid = |t: f64| -> Option<(f64, f64)> {
            self.pose_at(t).project(&self.camera, &p).map(|(r, c)| (r - row, c))
        };
        let not_visible = || Error::NotVisible(format!("({:.5}, {:.5}) not imaged in window", point.lat, point.lon));
        let (flo, _) = resid(lo).ok_or_else(not_visible)?;
        let (fhi, _) = resid(hi).ok_or_else(not_visible)?;
        if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
            return Err(not_visible());
        }
        let rising = fhi > flo;
        let mut t = 0.5 * (lo + hi);
        let mut last = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            let (f, col) = resid(t).ok_or_else(not_visible)?;
            last = f.abs();
            if last < TOLERANCE_PX {
                let cols = self.camera.sensor.active_cols as f64;
                if !(col >= -0.5 && col < cols - 0.5) {
                    return Err(not_visible());
                }
                return Ok((t, row, col));
            }
            if (f > 0.0) == rising {
                hi = t;
            } else {
                lo = t;
            }
            let h = 1e-3;
            let slope = match (resid(t + h), resid(t - h)) {
                (Some((a, _)), Some((b, _))) => (a - b) / (2.0 * h),
                _ => 0.0,
            };
            let newton = if slope != 0.0 { t - f / slope } else { f64::NAN };
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Err(Error::Convergence { iterations: MAX_ITERATIONS, residual: last })
    }
}

/// Free-function form of [`Platform::ground_to_pixel`].
pub fn ground_to_pixel(
    platform: &Platform,
    point: &GroundPoint,
    window: (f64, f64),
    row: f64,
) -> Result<(f64, f64, f64)> {
    platform.ground_to_pixel(point, window, row)
}
