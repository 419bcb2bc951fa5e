//! Band-to-band registration relative to a reference band.

use serde::{Deserialize, Serialize};

use super::fit_cubic;
use super::geolocation::{bin_medians, residuals_from_tiepoints};
use super::matching::{dense_match, MatchOptions, Raster};
use crate::error::{domain, Result};
use crate::geom::{LookCorrection, Platform};
use crate::tdi::{GridDef, ProductGrid};

/// Band used as the registration reference.
pub const REFERENCE_BAND: u8 = 7;

/// Registration offset of one band across the field of view.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BbrProfile {
    pub band: u8,
    /// Bin centres in normalized field coordinate.
    pub xi: Vec<f64>,
    /// Per-bin median offsets (product pixels).
    pub along: Vec<f64>,
    pub across: Vec<f64>,
    /// Bins without tie points, filled from their neighbours.
    pub interpolated: Vec<bool>,
    /// Cubic fits over the field (pixels).
    pub along_fit: [f64; 4],
    pub across_fit: [f64; 4],
    /// RMS of bin medians about the fits (pixels).
    pub residual_rms: f64,
    /// Look correction that cancels the measured offsets.
    pub correction: LookCorrection,
}

fn cubic(c: &[f64; 4], x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

impl BbrProfile {
    fn zero(band: u8, bins: usize) -> Self {
        BbrProfile {
            band,
            xi: centres(bins),
            along: vec![0.0; bins],
            across: vec![0.0; bins],
            interpolated: vec![false; bins],
            ..Default::default()
        }
    }

    /// Fitted `(along, across)` offset at a field position.
    pub fn offset_at(&self, xi: f64) -> (f64, f64) {
        (cubic(&self.along_fit, xi), cubic(&self.across_fit, xi))
    }
}

fn centres(bins: usize) -> Vec<f64> {
    (0..bins).map(|k| -1.0 + (k as f64 + 0.5) * 2.0 / bins as f64).collect()
}

/// Places binned medians on the full bin layout, interpolating gaps.
fn fill_bins(bins: usize, binned: &[(f64, f64)]) -> (Vec<f64>, Vec<bool>) {
    let mut values = vec![f64::NAN; bins];
    for &(x, v) in binned {
        let b = (((x + 1.0) / 2.0 * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
        values[b] = v;
    }
    let known: Vec<usize> = (0..bins).filter(|&k| values[k].is_finite()).collect();
    let flags: Vec<bool> = values.iter().map(|v| !v.is_finite()).collect();
    if known.is_empty() {
        return (vec![0.0; bins], flags);
    }
    for k in 0..bins {
        if values[k].is_finite() {
            continue;
        }
        let left = known.iter().rev().find(|&&b| b < k);
        let right = known.iter().find(|&&b| b > k);
        values[k] = match (left, right) {
            (Some(&l), Some(&r)) => {
                let w = (k - l) as f64 / (r - l) as f64;
                values[l] * (1.0 - w) + values[r] * w
            }
            (Some(&l), None) => values[l],
            (None, Some(&r)) => values[r],
            (None, None) => unreachable!(),
        };
    }
    (values, flags)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BbrOptions {
    pub matching: MatchOptions,
    pub bins: usize,
}

impl Default for BbrOptions {
    fn default() -> Self {
        BbrOptions { matching: MatchOptions { spacing: 6, ..MatchOptions::default() }, bins: 16 }
    }
}

/// Registration profile of every band of an L1B product against the
/// reference band. `platform` carries the processing geometry and is used to
/// turn image offsets into look corrections.
pub fn estimate_bbr(product: &ProductGrid, reference_band: u8, platform: &Platform, opts: &BbrOptions) -> Result<Vec<BbrProfile>> {
    if !matches!(product.grid, GridDef::L1b { .. }) {
        return Err(domain("band-to-band registration is measured on L1B products"));
    }
    if opts.bins < 4 {
        return Err(domain("at least 4 field bins are needed for a cubic profile"));
    }
    let reference = Raster::from_product(product, reference_band)?;
    let mut out = Vec::with_capacity(product.bands.len());
    for &band in &product.bands {
        if band == reference_band {
            out.push(BbrProfile::zero(band, opts.bins));
            continue;
        }
        let target = Raster::from_product(product, band)?;
        let tps = dense_match(&reference, &target, &opts.matching)?;
        let field = residuals_from_tiepoints(product, platform, band, &tps);
        let xi: Vec<f64> = field.points.iter().map(|r| r.xi).collect();
        let column = |get: fn(&super::geolocation::Residual) -> f64| -> Vec<f64> { field.points.iter().map(get).collect() };
        let (along, flags) = fill_bins(opts.bins, &bin_medians(&xi, &column(|r| r.d_along), opts.bins));
        let (across, _) = fill_bins(opts.bins, &bin_medians(&xi, &column(|r| r.d_across), opts.bins));
        let (roll, _) = fill_bins(opts.bins, &bin_medians(&xi, &column(|r| r.roll), opts.bins));
        let (pitch, _) = fill_bins(opts.bins, &bin_medians(&xi, &column(|r| r.pitch), opts.bins));
        let centres = centres(opts.bins);
        let along_fit = fit_cubic(&centres, &along);
        let across_fit = fit_cubic(&centres, &across);
        let ss: f64 = centres
            .iter()
            .enumerate()
            .map(|(k, &x)| (along[k] - cubic(&along_fit, x)).powi(2) + (across[k] - cubic(&across_fit, x)).powi(2))
            .sum();
        out.push(BbrProfile {
            band,
            xi: centres.clone(),
            along,
            across,
            interpolated: flags,
            along_fit,
            across_fit,
            residual_rms: (ss / opts.bins as f64).sqrt(),
            correction: LookCorrection { roll: fit_cubic(&centres, &roll), pitch: fit_cubic(&centres, &pitch) },
        });
    }
    Ok(out)
}
