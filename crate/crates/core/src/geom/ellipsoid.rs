//! WGS-84 ellipsoid, geodetic coordinates and ray intersection.

use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

/// Semi-major axis (m).
pub const WGS84_A: f64 = 6_378_137.0;
/// Flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// Semi-minor axis (m).
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);
/// Earth rotation rate (rad/s).
pub const EARTH_ROTATION_RATE: f64 = 7.292_115e-5;
/// Geocentric gravitational constant (m^3/s^2).
pub const GM_EARTH: f64 = 3.986_004_418e14;

/// A point on or above the WGS-84 ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    /// Geodetic latitude (deg).
    pub lat: f64,
    /// Longitude (deg), normalized to (-180, 180].
    pub lon: f64,
    /// Height above the ellipsoid (m).
    pub height: f64,
}

impl GroundPoint {
    pub fn new(lat: f64, lon: f64, height: f64) -> Self {
        GroundPoint { lat, lon: normalize_lon(lon), height }
    }

    pub fn to_ecef(&self) -> Vec3 {
        geodetic_to_ecef(self.lat.to_radians(), self.lon.to_radians(), self.height)
    }

    pub fn from_ecef(p: &Vec3) -> Self {
        let (lat, lon, h) = ecef_to_geodetic(p);
        GroundPoint::new(lat.to_degrees(), lon.to_degrees(), h)
    }
}

/// Wrap a longitude in degrees into (-180, 180].
pub fn normalize_lon(lon: f64) -> f64 {
    let mut l = lon % 360.0;
    if l <= -180.0 {
        l += 360.0;
    } else if l > 180.0 {
        l -= 360.0;
    }
    l
}

/// Prime vertical radius of curvature at geodetic latitude `lat` (rad).
pub fn prime_vertical_radius(lat: f64) -> f64 {
    WGS84_A / (1.0 - WGS84_E2 * lat.sin().powi(2)).sqrt()
}

pub fn geodetic_to_ecef(lat: f64, lon: f64, h: f64) -> Vec3 {
    let n = prime_vertical_radius(lat);
    let (slat, clat) = lat.sin_cos();
    let (slon, clon) = lon.sin_cos();
    Vec3::new(
        (n + h) * clat * clon,
        (n + h) * clat * slon,
        ((1.0 - WGS84_E2) * n + h) * slat,
    )
}

/// ECEF to geodetic (lat, lon in rad; height in m).
///
/// Bowring's initial value followed by fixed-point refinement; converges to
/// well below a micrometre for points within a few thousand km of the surface.
pub fn ecef_to_geodetic(p: &Vec3) -> (f64, f64, f64) {
    let lon = p.y.atan2(p.x);
    let r = (p.x * p.x + p.y * p.y).sqrt();
    if r < 1e-9 {
        let lat = if p.z >= 0.0 { std::f64::consts::FRAC_PI_2 } else { -std::f64::consts::FRAC_PI_2 };
        return (lat, lon, p.z.abs() - WGS84_B);
    }
    let ep2 = (WGS84_A * WGS84_A - WGS84_B * WGS84_B) / (WGS84_B * WGS84_B);
    let theta = (p.z * WGS84_A).atan2(r * WGS84_B);
    let (st, ct) = theta.sin_cos();
    let mut lat = (p.z + ep2 * WGS84_B * st.powi(3)).atan2(r - WGS84_E2 * WGS84_A * ct.powi(3));
    let mut h = 0.0;
    for _ in 0..4 {
        let n = prime_vertical_radius(lat);
        let (slat, clat) = lat.sin_cos();
        h = if clat.abs() > 1e-3 { r / clat - n } else { p.z / slat - (1.0 - WGS84_E2) * n };
        lat = (p.z / r / (1.0 - WGS84_E2 * n / (n + h))).atan();
    }
    (lat, lon, h)
}

/// Outward ellipsoid normal (unit) at geodetic latitude/longitude (rad).
pub fn surface_normal(lat: f64, lon: f64) -> Vec3 {
    let (slat, clat) = lat.sin_cos();
    let (slon, clon) = lon.sin_cos();
    Vec3::new(clat * clon, clat * slon, slat)
}

/// Value of the implicit surface function `x²/a'² + y²/a'² + z²/b'² - 1` for
/// the ellipsoid offset by `height`.
pub fn implicit_residual(p: &Vec3, height: f64) -> f64 {
    let a = WGS84_A + height;
    let b = WGS84_B + height;
    (p.x * p.x + p.y * p.y) / (a * a) + p.z * p.z / (b * b) - 1.0
}

/// Nearer intersection of the ray `origin + t·dir` (t > 0) with the ellipsoid
/// whose semi-axes are grown by `height`.
pub fn intersect_offset_ellipsoid(origin: &Vec3, dir: &Vec3, height: f64) -> Result<Vec3> {
    let a = WGS84_A + height;
    let b = WGS84_B + height;
    let ox = origin.x / a;
    let oy = origin.y / a;
    let oz = origin.z / b;
    let dx = dir.x / a;
    let dy = dir.y / a;
    let dz = dir.z / b;
    let qa = dx * dx + dy * dy + dz * dz;
    let qb = 2.0 * (ox * dx + oy * dy + oz * dz);
    let qc = ox * ox + oy * oy + oz * oz - 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::NoIntersection);
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = -0.5 * (qb + qb.signum() * sq);
    let (t1, t2) = (q / qa, qc / q);
    let t = match (t1 > 0.0, t2 > 0.0) {
        (true, true) => t1.min(t2),
        (true, false) => t1,
        (false, true) => t2,
        (false, false) => return Err(Error::NoIntersection),
    };
    Ok(origin + dir * t)
}

/// Intersection of a ray with the surface of constant geodetic height.
///
/// Starts from the offset-ellipsoid solution and refines along the ray so
/// the geodetic height matches `height` exactly (the offset ellipsoid is only
/// an approximation of a constant-height surface when `height != 0`).
pub fn intersect_height(origin: &Vec3, dir: &Vec3, height: f64) -> Result<Vec3> {
    let mut p = intersect_offset_ellipsoid(origin, dir, height)?;
    if height == 0.0 {
        return Ok(p);
    }
    let d = dir.normalize();
    for _ in 0..5 {
        let (lat, lon, h) = ecef_to_geodetic(&p);
        let dh = h - height;
        if dh.abs() < 1e-9 {
            break;
        }
        let n = surface_normal(lat, lon);
        let rate = d.dot(&n);
        if rate.abs() < 1e-12 {
            return Err(Error::NoIntersection);
        }
        p -= d * (dh / rate);
    }
    Ok(p)
}

/// Local east/north/up basis at a geodetic position (rad).
pub fn enu_basis(lat: f64, lon: f64) -> (Vec3, Vec3, Vec3) {
    let (slat, clat) = lat.sin_cos();
    let (slon, clon) = lon.sin_cos();
    let east = Vec3::new(-slon, clon, 0.0);
    let north = Vec3::new(-slat * clon, -slat * slon, clat);
    let up = Vec3::new(clat * clon, clat * slon, slat);
    (east, north, up)
}
