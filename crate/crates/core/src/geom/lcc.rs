//! Two-standard-parallel Lambert Conformal Conic on WGS-84.

use serde::{Deserialize, Serialize};

use super::ellipsoid::{GroundPoint, WGS84_A, WGS84_E2};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LccProjection {
    /// Standard parallels (deg).
    pub parallels: [f64; 2],
    pub ref_lat: f64,
    pub ref_lon: f64,
    pub false_easting: f64,
    pub false_northing: f64,
    /// Output pixel size (m).
    pub pixel_size: f64,
}

fn m_of(phi: f64) -> f64 {
    phi.cos() / (1.0 - WGS84_E2 * phi.sin().powi(2)).sqrt()
}

fn t_of(phi: f64) -> f64 {
    let e = WGS84_E2.sqrt();
    let es = e * phi.sin();
    (std::f64::consts::FRAC_PI_4 - phi / 2.0).tan() / ((1.0 - es) / (1.0 + es)).powf(e / 2.0)
}

const POLE_LIMIT: f64 = 89.999;

impl LccProjection {
    /// Parallels at `lat ± 2°`, reference at the given centre.
    pub fn centered(lat: f64, lon: f64, pixel_size: f64) -> Self {
        LccProjection {
            parallels: [lat - 2.0, lat + 2.0],
            ref_lat: lat,
            ref_lon: lon,
            false_easting: 0.0,
            false_northing: 0.0,
            pixel_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [p1, p2] = self.parallels;
        if (p1 - p2).abs() < 1e-9 {
            return Err(domain("standard parallels must be distinct"));
        }
        if (p1 + p2).abs() < 1e-9 {
            return Err(domain("standard parallels symmetric about the equator give no cone"));
        }
        if [p1, p2, self.ref_lat].iter().any(|p| p.abs() >= POLE_LIMIT) {
            return Err(domain("projection parameters at a pole"));
        }
        if !(self.pixel_size > 0.0) {
            return Err(domain("pixel size must be positive"));
        }
        Ok(())
    }

    /// (n, F, rho0)
    fn constants(&self) -> (f64, f64, f64) {
        let (p1, p2) = (self.parallels[0].to_radians(), self.parallels[1].to_radians());
        let (m1, m2) = (m_of(p1), m_of(p2));
        let (t1, t2) = (t_of(p1), t_of(p2));
        let n = (m1.ln() - m2.ln()) / (t1.ln() - t2.ln());
        let f = m1 / (n * t1.powf(n));
        let rho0 = WGS84_A * f * t_of(self.ref_lat.to_radians()).powf(n);
        (n, f, rho0)
    }

    pub fn forward(&self, p: &GroundPoint) -> Result<(f64, f64)> {
        self.validate()?;
        if p.lat.abs() >= POLE_LIMIT {
            return Err(domain(format!("latitude {} at the projection pole", p.lat)));
        }
        let (n, f, rho0) = self.constants();
        let rho = WGS84_A * f * t_of(p.lat.to_radians()).powf(n);
        let dlon = super::ellipsoid::normalize_lon(p.lon - self.ref_lon);
        let theta = n * dlon.to_radians();
        Ok((rho * theta.sin() + self.false_easting, rho0 - rho * theta.cos() + self.false_northing))
    }

    pub fn inverse(&self, x: f64, y: f64) -> Result<GroundPoint> {
        self.validate()?;
        let (n, f, rho0) = self.constants();
        let dx = x - self.false_easting;
        let dy = rho0 - (y - self.false_northing);
        let sgn = n.signum();
        let rho = sgn * (dx * dx + dy * dy).sqrt();
        if rho == 0.0 {
            return Err(domain("map origin of the cone is a pole"));
        }
        let t = (rho / (WGS84_A * f)).powf(1.0 / n);
        let theta = (sgn * dx).atan2(sgn * dy);
        let lon = theta / n + self.ref_lon.to_radians();
        let e = WGS84_E2.sqrt();
        let mut phi = std::f64::consts::FRAC_PI_2 - 2.0 * t.atan();
        for _ in 0..50 {
            let es = e * phi.sin();
            let next = std::f64::consts::FRAC_PI_2 - 2.0 * (t * ((1.0 - es) / (1.0 + es)).powf(e / 2.0)).atan();
            let done = (next - phi).abs() < 1e-15;
            phi = next;
            if done {
                break;
            }
        }
        Ok(GroundPoint::new(phi.to_degrees(), lon.to_degrees(), 0.0))
    }

    /// Point scale factor at latitude `lat` (deg).
    pub fn scale_factor(&self, lat: f64) -> f64 {
        let (n, f, _) = self.constants();
        let phi = lat.to_radians();
        WGS84_A * f * t_of(phi).powf(n) * n / (WGS84_A * m_of(phi))
    }
}

pub fn lcc_forward(proj: &LccProjection, p: &GroundPoint) -> Result<(f64, f64)> {
    proj.forward(p)
}

pub fn lcc_inverse(proj: &LccProjection, x: f64, y: f64) -> Result<GroundPoint> {
    proj.inverse(x, y)
}

/// A north-up raster on an LCC projection. Pixel `(i, j)` is centred at
/// easting `x0 + j·size`, northing `y0 − i·size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LccGrid {
    pub projection: LccProjection,
    pub x0: f64,
    pub y0: f64,
    pub rows: usize,
    pub cols: usize,
}

impl LccGrid {
    /// Smallest grid covering the given points, with `margin` extra pixels.
    pub fn covering(projection: LccProjection, points: &[GroundPoint], margin: usize) -> Result<Self> {
        let mut xmin = f64::INFINITY;
        let mut xmax = f64::NEG_INFINITY;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for p in points {
            let (x, y) = projection.forward(p)?;
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if !xmin.is_finite() {
            return Err(domain("no points to cover"));
        }
        let ps = projection.pixel_size;
        let m = margin as f64 * ps;
        let x0 = ((xmin - m) / ps).floor() * ps;
        let y0 = ((ymax + m) / ps).ceil() * ps;
        let cols = ((xmax + m - x0) / ps).ceil() as usize + 1;
        let rows = ((y0 - (ymin - m)) / ps).ceil() as usize + 1;
        Ok(LccGrid { projection, x0, y0, rows, cols })
    }

    pub fn map_xy(&self, i: f64, j: f64) -> (f64, f64) {
        let ps = self.projection.pixel_size;
        (self.x0 + j * ps, self.y0 - i * ps)
    }

    pub fn pixel_of(&self, x: f64, y: f64) -> (f64, f64) {
        let ps = self.projection.pixel_size;
        ((self.y0 - y) / ps, (x - self.x0) / ps)
    }

    pub fn ground(&self, i: f64, j: f64) -> Result<GroundPoint> {
        let (x, y) = self.map_xy(i, j);
        self.projection.inverse(x, y)
    }
}
