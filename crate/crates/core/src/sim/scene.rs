//! Synthetic ground radiance scenes on a geographic grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fft::{fft2, freq_index};
use crate::geom::ellipsoid::{WGS84_A, WGS84_E2};
use crate::geom::GroundPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Extent {
    pub fn around(points: &[GroundPoint], margin_deg: f64) -> Self {
        let mut e = Extent { lat_min: 90.0, lat_max: -90.0, lon_min: 180.0, lon_max: -180.0 };
        for p in points {
            e.lat_min = e.lat_min.min(p.lat);
            e.lat_max = e.lat_max.max(p.lat);
            e.lon_min = e.lon_min.min(p.lon);
            e.lon_max = e.lon_max.max(p.lon);
        }
        e.lat_min -= margin_deg;
        e.lat_max += margin_deg;
        e.lon_min -= margin_deg;
        e.lon_max += margin_deg;
        e
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.lat_min && lat <= self.lat_max && lon >= self.lon_min && lon <= self.lon_max
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.lat_min + self.lat_max), 0.5 * (self.lon_min + self.lon_max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTarget {
    pub lat: f64,
    pub lon: f64,
    /// Added radiance at the centre.
    pub amplitude: f64,
    /// Gaussian radius (m).
    pub radius: f64,
}

/// A box of exactly constant radiance in every band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformPatch {
    pub extent: Extent,
    pub radiance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextureParams {
    /// Grid cell size (m).
    pub cell_size: f64,
    /// Exponent of the power spectral density, PSD ∝ |k|^slope.
    pub slope: f64,
    /// Spectral cutoff as a fraction of the grid Nyquist frequency.
    pub k_max: f64,
    /// Mean radiance per band.
    pub mean: f64,
    /// Relative standard deviation of the texture; 0 gives a flat scene.
    pub contrast: f64,
    /// Correlation between the texture of different bands.
    pub band_correlation: f64,
    pub point_targets: Vec<PointTarget>,
    pub patches: Vec<UniformPatch>,
}

impl Default for TextureParams {
    fn default() -> Self {
        TextureParams {
            cell_size: 100.0,
            slope: -2.0,
            k_max: 1.0,
            mean: 80.0,
            contrast: 0.2,
            band_correlation: 0.9,
            point_targets: Vec::new(),
            patches: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Field {
    Constant(f64),
    Grid(Vec<f64>),
}

/// Per-band radiance on a regular latitude/longitude grid; cell `(i, j)`
/// is centred at `lat_min + (i + ½)·dlat`, `lon_min + (j + ½)·dlon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub extent: Extent,
    pub nlat: usize,
    pub nlon: usize,
    pub bands: Vec<u8>,
    pub fields: Vec<Field>,
    pub seed: u64,
}

/// Meridian and parallel metres per degree at latitude `lat` (deg).
pub fn metres_per_degree(lat: f64) -> (f64, f64) {
    let phi = lat.to_radians();
    let w = 1.0 - WGS84_E2 * phi.sin().powi(2);
    let m = WGS84_A * (1.0 - WGS84_E2) / w.powf(1.5);
    let n = WGS84_A / w.sqrt();
    (m.to_radians(), (n * phi.cos()).to_radians())
}

/// Zero-mean, unit-variance power-law noise with spectrum `|k|^slope`
/// truncated at `k_max` of Nyquist.
pub fn power_law_noise(rows: usize, cols: usize, slope: f64, k_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> =
        (0..rows * cols).map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0)).collect();
    fft2(&mut buf, rows, cols, false);
    for i in 0..rows {
        let fy = freq_index(i, rows) / rows as f64;
        for j in 0..cols {
            let fx = freq_index(j, cols) / cols as f64;
            let k = (fx * fx + fy * fy).sqrt();
            let a = if k == 0.0 || k > 0.5 * k_max { 0.0 } else { k.powf(slope / 2.0) };
            buf[i * cols + j] *= a;
        }
    }
    fft2(&mut buf, rows, cols, true);
    let mut out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let n = out.len() as f64;
    let mean = out.iter().sum::<f64>() / n;
    let std = (out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std > 0.0 {
        out.iter_mut().for_each(|v| *v = (*v - mean) / std);
    }
    out
}

/// Builds a band-correlated textured scene over `extent`.
pub fn generate_scene(seed: u64, extent: Extent, bands: &[u8], tex: &TextureParams) -> Result<Scene> {
    if !(extent.lat_max > extent.lat_min && extent.lon_max > extent.lon_min) {
        return Err(domain("scene extent must be positive"));
    }
    if bands.is_empty() {
        return Err(domain("scene needs at least one band"));
    }
    if !(tex.cell_size > 0.0) || !(0.0..=1.0).contains(&tex.band_correlation) {
        return Err(domain("invalid texture parameters"));
    }
    let (clat, _) = extent.center();
    let (mlat, mlon) = metres_per_degree(clat);
    let nlat = (((extent.lat_max - extent.lat_min) * mlat / tex.cell_size).ceil() as usize).max(2);
    let nlon = (((extent.lon_max - extent.lon_min) * mlon / tex.cell_size).ceil() as usize).max(2);
    let mut scene = Scene { extent, nlat, nlon, bands: bands.to_vec(), fields: Vec::new(), seed };
    let flat = tex.contrast == 0.0 && tex.point_targets.is_empty() && tex.patches.is_empty();
    if flat {
        scene.fields = bands.iter().map(|_| Field::Constant(tex.mean)).collect();
        return Ok(scene);
    }
    let common = if tex.contrast > 0.0 { power_law_noise(nlat, nlon, tex.slope, tex.k_max, seed) } else { vec![0.0; nlat * nlon] };
    let rho = tex.band_correlation;
    for (bi, &b) in bands.iter().enumerate() {
        let mut v: Vec<f64> = if tex.contrast > 0.0 && rho < 1.0 {
            let own = power_law_noise(nlat, nlon, tex.slope, tex.k_max, seed ^ (0x9e37_79b9 * (b as u64 + 1)));
            common.iter().zip(&own).map(|(c, o)| rho.sqrt() * c + (1.0 - rho).sqrt() * o).collect()
        } else {
            common.clone()
        };
        // band-dependent brightness so bands are not trivially identical
        let level = tex.mean * (1.0 + 0.02 * bi as f64);
        v.iter_mut().for_each(|x| *x = (level * (1.0 + tex.contrast * *x)).max(0.0));
        for t in &tex.point_targets {
            let r2 = (3.0 * t.radius).powi(2);
            for i in 0..nlat {
                let lat = scene.cell_lat(i);
                let dy = (lat - t.lat) * mlat;
                if dy * dy > r2 {
                    continue;
                }
                for j in 0..nlon {
                    let dx = (scene.cell_lon(j) - t.lon) * mlon;
                    let d2 = dx * dx + dy * dy;
                    if d2 <= r2 {
                        v[i * nlon + j] += t.amplitude * (-0.5 * d2 / (t.radius * t.radius)).exp();
                    }
                }
            }
        }
        for p in &tex.patches {
            for i in 0..nlat {
                for j in 0..nlon {
                    if p.extent.contains(scene.cell_lat(i), scene.cell_lon(j)) {
                        v[i * nlon + j] = p.radiance;
                    }
                }
            }
        }
        scene.fields.push(Field::Grid(v));
    }
    Ok(scene)
}

impl Scene {
    pub fn constant(extent: Extent, bands: &[u8], radiance: f64) -> Self {
        Scene { extent, nlat: 2, nlon: 2, bands: bands.to_vec(), fields: bands.iter().map(|_| Field::Constant(radiance)).collect(), seed: 0 }
    }

    pub fn dlat(&self) -> f64 {
        (self.extent.lat_max - self.extent.lat_min) / self.nlat as f64
    }

    pub fn dlon(&self) -> f64 {
        (self.extent.lon_max - self.extent.lon_min) / self.nlon as f64
    }

    pub fn cell_lat(&self, i: usize) -> f64 {
        self.extent.lat_min + (i as f64 + 0.5) * self.dlat()
    }

    pub fn cell_lon(&self, j: usize) -> f64 {
        self.extent.lon_min + (j as f64 + 0.5) * self.dlon()
    }

    pub fn band_index(&self, band: u8) -> Option<usize> {
        self.bands.iter().position(|&b| b == band)
    }

    /// Bilinear radiance; `None` outside the scene.
    pub fn sample(&self, band_idx: usize, lat: f64, lon: f64) -> Option<f64> {
        if !self.extent.contains(lat, lon) {
            return None;
        }
        match &self.fields[band_idx] {
            Field::Constant(v) => Some(*v),
            Field::Grid(g) => {
                let y = ((lat - self.extent.lat_min) / self.dlat() - 0.5).clamp(0.0, (self.nlat - 1) as f64);
                let x = ((lon - self.extent.lon_min) / self.dlon() - 0.5).clamp(0.0, (self.nlon - 1) as f64);
                let i = (y.floor() as usize).min(self.nlat - 2);
                let j = (x.floor() as usize).min(self.nlon - 2);
                let (fy, fx) = (y - i as f64, x - j as f64);
                let n = self.nlon;
                let v00 = g[i * n + j];
                let v01 = g[i * n + j + 1];
                let v10 = g[(i + 1) * n + j];
                let v11 = g[(i + 1) * n + j + 1];
                Some((1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11))
            }
        }
    }

    pub fn sample_band(&self, band: u8, lat: f64, lon: f64) -> Option<f64> {
        self.band_index(band).and_then(|b| self.sample(b, lat, lon))
    }
}
