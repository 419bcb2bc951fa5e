//! Signal-to-noise ratio over uniform regions.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geocal::Raster;
use crate::geom::Mode;
use crate::tdi::ProductGrid;

/// Rectangular pixel region `(row0, col0, rows, cols)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Region {
    pub fn new(row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Region { row0, col0, rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Minimum region size (pixels).
pub const MIN_REGION: usize = 100;
/// Largest detrended relative deviation still accepted as uniform.
pub const MAX_RELATIVE_STD: f64 = 0.05;
/// Relative deviation below which a region counts as noiseless (single
/// precision storage resolution).
const NOISELESS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrEntry {
    pub band: u8,
    pub mean: f64,
    pub std: f64,
    /// `mean / std`; infinite for a noiseless region.
    pub snr: f64,
    pub pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub mode: Mode,
    pub entries: Vec<SnrEntry>,
}

impl SnrReport {
    pub fn table(&self) -> String {
        let mut s = format!("mode {}\nband        mean         std          snr  pixels\n", self.mode);
        for e in &self.entries {
            s += &format!("{:>4} {:>11.4} {:>11.5} {:>12.2} {:>7}\n", e.band, e.mean, e.std, e.snr, e.pixels);
        }
        s
    }
}

/// Mean and plane-detrended standard deviation of a raster region.
pub fn region_stats(img: &Raster, region: &Region) -> Result<(f64, f64)> {
    if region.len() < MIN_REGION {
        return Err(domain(format!("region has {} pixels, at least {MIN_REGION} required", region.len())));
    }
    if region.row0 + region.rows > img.rows || region.col0 + region.cols > img.cols {
        return Err(domain("region exceeds the image"));
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    let mut sum = 0.0;
    let (ci, cj) = ((region.rows as f64 - 1.0) / 2.0, (region.cols as f64 - 1.0) / 2.0);
    for i in 0..region.rows {
        for j in 0..region.cols {
            let v = img.at(region.row0 + i, region.col0 + j);
            if !v.is_finite() {
                return Err(domain("region contains unfilled pixels"));
            }
            let x = Vector3::new(1.0, i as f64 - ci, j as f64 - cj);
            ata += x * x.transpose();
            atb += x * v;
            sum += v;
        }
    }
    let n = region.len() as f64;
    let mean = sum / n;
    let coef = ata.try_inverse().ok_or_else(|| domain("region too thin to detrend"))? * atb;
    let mut ss = 0.0;
    for i in 0..region.rows {
        for j in 0..region.cols {
            let v = img.at(region.row0 + i, region.col0 + j);
            let fit = coef[0] + coef[1] * (i as f64 - ci) + coef[2] * (j as f64 - cj);
            ss += (v - fit).powi(2);
        }
    }
    Ok((mean, (ss / (n - 3.0)).sqrt()))
}

/// SNR of one band over a uniform region.
pub fn measure_snr(product: &ProductGrid, region: &Region, band: u8) -> Result<SnrEntry> {
    let img = Raster::from_product(product, band)?;
    let (mean, std) = region_stats(&img, region)?;
    let rel = std / mean.abs();
    if !(mean.abs() > 0.0) || rel > MAX_RELATIVE_STD {
        return Err(domain(format!("region is not uniform: detrended relative std {:.2}%", 100.0 * rel)));
    }
    let snr = if rel < NOISELESS { f64::INFINITY } else { mean / std };
    Ok(SnrEntry { band, mean, std, snr, pixels: region.len() })
}

/// SNR of every band of a product over one region.
pub fn snr_report(product: &ProductGrid, region: &Region) -> Result<SnrReport> {
    let entries = product.bands.iter().map(|&b| measure_snr(product, region, b)).collect::<Result<_>>()?;
    Ok(SnrReport { mode: product.metadata.mode, entries })
}
