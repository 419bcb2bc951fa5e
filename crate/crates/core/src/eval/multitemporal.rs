//! Registration accuracy between two acquisitions of the same area.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geocal::{dense_match, ErrorSample, ErrorStats, MatchOptions, Raster};
use crate::tdi::{GridDef, ProductGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultitemporalReport {
    pub pixels: ErrorStats,
    pub metres: ErrorStats,
    pub tie_points: usize,
}

/// Tie-point offsets of `b` relative to `a` on their shared L1C grid.
pub fn multitemporal_accuracy(a: &ProductGrid, b: &ProductGrid, band: u8, opts: &MatchOptions) -> Result<MultitemporalReport> {
    let (GridDef::L1c(ga), GridDef::L1c(gb)) = (&a.grid, &b.grid) else {
        return Err(domain("multi-temporal comparison needs two L1C products"));
    };
    if ga != gb {
        return Err(domain("products are not on the same projection grid"));
    }
    let ra = Raster::from_product(a, band)?;
    let rb = Raster::from_product(b, band)?;
    let overlap = ra.data.iter().zip(&rb.data).filter(|(x, y)| x.is_finite() && y.is_finite()).count();
    if overlap < opts.patch * opts.patch * opts.min_points {
        return Err(domain(format!("insufficient overlap: {overlap} common pixels")));
    }
    let tps = dense_match(&ra, &rb, opts).map_err(|e| match e {
        Error::InsufficientTiePoints { found, required } => {
            domain(format!("insufficient overlap: {found} tie points, {required} required"))
        }
        e => e,
    })?;
    let px: Vec<ErrorSample> = tps.iter().map(|t| ErrorSample { col: t.ref_col, along: t.d_along, across: t.d_across }).collect();
    let size = ga.projection.pixel_size;
    let m: Vec<ErrorSample> =
        px.iter().map(|s| ErrorSample { col: s.col, along: s.along * size, across: s.across * size }).collect();
    Ok(MultitemporalReport { pixels: ErrorStats::from_samples(&px)?, metres: ErrorStats::from_samples(&m)?, tie_points: tps.len() })
}
