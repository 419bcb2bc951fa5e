//! Circular-orbit ephemeris used by the simulator and as processing
//! ephemeris. No J2; the Earth rotates uniformly beneath an inertial orbit
//! whose frame coincides with the Earth-fixed frame at the element epoch.

use serde::{Deserialize, Serialize};

use super::ellipsoid::{EARTH_ROTATION_RATE, GM_EARTH, WGS84_A};
use super::Vec3;
use crate::error::{domain, Result};

/// Near-circular orbit elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitElements {
    /// Element epoch (s).
    pub epoch: f64,
    /// Altitude above the equatorial radius (m).
    pub altitude: f64,
    /// Inclination (deg).
    pub inclination: f64,
    /// Earth-fixed longitude of the ascending node at epoch (deg).
    pub node_longitude: f64,
    /// Argument of latitude at epoch (deg).
    pub arg_latitude: f64,
}

impl Default for OrbitElements {
    fn default() -> Self {
        OrbitElements {
            epoch: 0.0,
            altitude: 732_500.0,
            inclination: 98.331,
            node_longitude: 0.0,
            arg_latitude: 0.0,
        }
    }
}

/// Earth-fixed position and velocity at an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitState {
    pub epoch: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl OrbitState {
    /// Velocity relative to the non-rotating frame, expressed in Earth-fixed
    /// axes. This defines the along-track axis of the orbital frame.
    pub fn inertial_velocity(&self) -> Vec3 {
        self.velocity + Vec3::new(0.0, 0.0, EARTH_ROTATION_RATE).cross(&self.position)
    }
}

impl OrbitElements {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude > 100_000.0 && self.altitude < 5.0e7) {
            return Err(domain(format!("altitude {} m out of range", self.altitude)));
        }
        if !(0.0..=180.0).contains(&self.inclination) {
            return Err(domain(format!("inclination {} deg out of range", self.inclination)));
        }
        Ok(())
    }

    pub fn semi_major_axis(&self) -> f64 {
        WGS84_A + self.altitude
    }

    /// Mean motion (rad/s).
    pub fn mean_motion(&self) -> f64 {
        (GM_EARTH / self.semi_major_axis().powi(3)).sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.mean_motion()
    }

    /// Orbital speed relative to the non-rotating frame (m/s).
    pub fn speed(&self) -> f64 {
        self.mean_motion() * self.semi_major_axis()
    }

    /// Inertial state (epoch-aligned frame) at time `t`.
    fn inertial(&self, t: f64) -> (Vec3, Vec3) {
        let a = self.semi_major_axis();
        let n = self.mean_motion();
        let u = self.arg_latitude.to_radians() + n * (t - self.epoch);
        let (su, cu) = u.sin_cos();
        let (si, ci) = self.inclination.to_radians().sin_cos();
        let (so, co) = self.node_longitude.to_radians().sin_cos();
        let p = Vec3::new(co * cu - so * su * ci, so * cu + co * su * ci, su * si);
        let q = Vec3::new(-co * su - so * cu * ci, -so * su + co * cu * ci, cu * si);
        (p * a, q * (a * n))
    }

    /// Earth-fixed state at time `t`.
    pub fn state_at(&self, t: f64) -> OrbitState {
        let (r, v) = self.inertial(t);
        let theta = EARTH_ROTATION_RATE * (t - self.epoch);
        let (s, c) = theta.sin_cos();
        let rot = |x: &Vec3| Vec3::new(c * x.x + s * x.y, -s * x.x + c * x.y, x.z);
        let pos = rot(&r);
        let vel = rot(&v) - Vec3::new(0.0, 0.0, EARTH_ROTATION_RATE).cross(&pos);
        OrbitState { epoch: t, position: pos, velocity: vel }
    }
}

/// Earth-fixed state of a circular orbit at time `t`.
pub fn propagate_orbit(elements: &OrbitElements, t: f64) -> OrbitState {
    elements.state_at(t)
}
