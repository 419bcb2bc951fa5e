//! Photo-response non-uniformity: relative column gains from scene stacks.

use serde::{Deserialize, Serialize};

use super::dark::median;
use super::frame::Frame;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrnuTable {
    pub band: u8,
    /// Multiplicative correction per column, mean 1.
    pub gains: Vec<f64>,
    /// Columns with no usable response.
    pub dead: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrnuOptions {
    pub min_scenes: usize,
    /// Fraction trimmed from each tail.
    pub trim: f64,
}

impl Default for PrnuOptions {
    fn default() -> Self {
        PrnuOptions { min_scenes: 50, trim: 0.1 }
    }
}

impl PrnuTable {
    pub fn unity(band: u8, cols: usize) -> Self {
        PrnuTable { band, gains: vec![1.0; cols], dead: vec![false; cols] }
    }

    /// Normalizes gains to mean 1 over live columns; dead columns stay 1.
    pub fn renormalize(&mut self) {
        let live: Vec<f64> = self.gains.iter().zip(&self.dead).filter(|(_, d)| !**d).map(|(g, _)| *g).collect();
        if live.is_empty() {
            return;
        }
        let mean = live.iter().sum::<f64>() / live.len() as f64;
        for (g, d) in self.gains.iter_mut().zip(&self.dead) {
            if !*d {
                *g /= mean;
            }
        }
    }
}

fn trimmed_mean(values: &mut [f64], trim: f64) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let k = (values.len() as f64 * trim).floor() as usize;
    let kept = &values[k..values.len() - k];
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Estimates column gains from dark-corrected frames of radiometrically
/// diverse scenes. Each frame is first normalized by its own median so
/// bright scenes do not dominate, then each column's trimmed mean is
/// compared with the grand mean.
pub fn estimate_prnu(scenes: &[Frame], band: u8, opts: &PrnuOptions) -> Result<PrnuTable> {
    if scenes.len() < opts.min_scenes {
        return Err(Error::InsufficientData(format!("{} scenes, at least {} required", scenes.len(), opts.min_scenes)));
    }
    if !(0.0..0.5).contains(&opts.trim) {
        return Err(domain("trim fraction must be in [0, 0.5)"));
    }
    let cols = scenes[0].cols;
    if scenes.iter().any(|f| f.cols != cols || f.band != band) {
        return Err(domain("scene stack mixes bands or widths"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); cols];
    for f in scenes {
        let level = median(&mut f.data.clone());
        if !(level.abs() > 0.0) {
            continue;
        }
        for r in 0..f.rows {
            for (j, v) in f.row(r).iter().enumerate() {
                columns[j].push(v / level);
            }
        }
    }
    let means: Vec<f64> = columns.iter_mut().map(|c| if c.is_empty() { 0.0 } else { trimmed_mean(c, opts.trim) }).collect();
    let dead: Vec<bool> = means.iter().map(|&m| !(m.abs() > 1e-9)).collect();
    let live: Vec<f64> = means.iter().zip(&dead).filter(|(_, d)| !**d).map(|(m, _)| *m).collect();
    if live.is_empty() {
        return Err(Error::InsufficientData("every column is dead".into()));
    }
    let grand = live.iter().sum::<f64>() / live.len() as f64;
    let gains = means.iter().zip(&dead).map(|(&m, &d)| if d { 1.0 } else { grand / m }).collect();
    let mut table = PrnuTable { band, gains, dead };
    table.renormalize();
    Ok(table)
}

/// Multiplies each column by its gain.
pub fn apply_prnu(frame: &Frame, table: &PrnuTable) -> Result<Frame> {
    if frame.band != table.band {
        return Err(domain(format!("PRNU table for band {} applied to band {}", table.band, frame.band)));
    }
    if table.gains.len() != frame.cols {
        return Err(domain("PRNU table width differs from frame"));
    }
    let mut out = frame.clone();
    for row in out.data.chunks_mut(frame.cols) {
        for (v, g) in row.iter_mut().zip(&table.gains) {
            *v *= g;
        }
    }
    Ok(out)
}
