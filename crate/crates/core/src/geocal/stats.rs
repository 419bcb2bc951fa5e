//! Summary statistics for registration and geolocation errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn median(v: &[f64]) -> f64 {
    crate::radiometry::dark::median(&mut v.to_vec())
}

/// Nearest-rank percentile, `p` in `(0, 1]`.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// 90th percentile of radial errors, nearest rank.
pub fn ce90(radii: &[f64]) -> Result<f64> {
    if radii.len() < 10 {
        return Err(Error::InsufficientData(format!("CE90 needs at least 10 samples, got {}", radii.len())));
    }
    Ok(percentile(&radii.iter().map(|r| r.abs()).collect::<Vec<_>>(), 0.9))
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Statistics of one error component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisStats {
    pub median: f64,
    /// 5th / 95th percentile of the per-column medians across the swath.
    pub lb: f64,
    pub ub: f64,
    pub mean: f64,
    pub three_sigma: f64,
}

/// One error observation at a swath position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub col: f64,
    pub along: f64,
    pub across: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorStats {
    pub along: AxisStats,
    pub across: AxisStats,
    pub radial_median: f64,
    pub ce90: f64,
    pub count: usize,
}

fn axis(samples: &[ErrorSample], get: impl Fn(&ErrorSample) -> f64) -> AxisStats {
    let values: Vec<f64> = samples.iter().map(&get).collect();
    let med = median(&values);
    let mut by_col: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for s in samples {
        by_col.entry(s.col.round() as i64).or_default().push(get(s));
    }
    let col_medians: Vec<f64> = by_col.values().map(|v| median(v)).collect();
    let (mean, sd) = mean_std(&values);
    AxisStats {
        median: med,
        lb: percentile(&col_medians, 0.05).min(med),
        ub: percentile(&col_medians, 0.95).max(med),
        mean,
        three_sigma: 3.0 * sd,
    }
}

impl ErrorStats {
    pub fn from_samples(samples: &[ErrorSample]) -> Result<Self> {
        let radii: Vec<f64> = samples.iter().map(|s| s.along.hypot(s.across)).collect();
        let ce = ce90(&radii)?;
        Ok(ErrorStats {
            along: axis(samples, |s| s.along),
            across: axis(samples, |s| s.across),
            radial_median: median(&radii),
            ce90: ce,
            count: samples.len(),
        })
    }
}

/// Per-band, per-axis registration summary over many products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbrStats {
    pub band: u8,
    pub along_mean: f64,
    pub along_three_sigma: f64,
    pub across_mean: f64,
    pub across_three_sigma: f64,
}

impl BbrStats {
    /// Worst of `|mean| + 3σ` over both axes.
    pub fn envelope(&self) -> f64 {
        (self.along_mean.abs() + self.along_three_sigma).max(self.across_mean.abs() + self.across_three_sigma)
    }
}

/// Mean and 3σ of registration profiles sampled across the field, pooled
/// over products. One inner vector of profiles per product.
pub fn bbr_stats(products: &[Vec<super::bbr::BbrProfile>]) -> Result<Vec<BbrStats>> {
    if products.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 products, got {}", products.len())));
    }
    let mut pooled: BTreeMap<u8, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for profiles in products {
        for p in profiles {
            let e = pooled.entry(p.band).or_default();
            for &xi in &p.xi {
                let (a, c) = p.offset_at(xi);
                e.0.push(a);
                e.1.push(c);
            }
        }
    }
    Ok(pooled
        .into_iter()
        .filter(|(_, (a, _))| !a.is_empty())
        .map(|(band, (a, c))| {
            let (am, asd) = mean_std(&a);
            let (cm, csd) = mean_std(&c);
            BbrStats { band, along_mean: am, along_three_sigma: 3.0 * asd, across_mean: cm, across_three_sigma: 3.0 * csd }
        })
        .collect())
}
