//! Per-pixel sample binning.

use serde::{Deserialize, Serialize};

/// One detector sample near a query ground location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborSample {
    /// Index of the source frame within its band.
    pub frame: usize,
    /// Binned row and column in the source frame.
    pub l: usize,
    pub m: usize,
    /// Kernel distance to the query location: the squared ground offset in
    /// output pixels by default, or the plain offset.
    pub distance: f64,
    pub value: f64,
}

/// `Σ e^(−dᵢ/σ²)·vᵢ`, divided by the weight sum when `normalize` is set.
/// Returns `(value, weight_sum)`, or `None` for no samples.
pub fn bin_exponential(samples: &[NeighborSample], sigma: f64, normalize: bool) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let s2 = sigma * sigma;
    let mut num = 0.0;
    let mut den = 0.0;
    if s2.is_infinite() {
        for s in samples {
            num += s.value;
            den += 1.0;
        }
    } else {
        for s in samples {
            let w = (-s.distance / s2).exp();
            num += w * s.value;
            den += w;
        }
    }
    if normalize {
        if den > 0.0 {
            Some((num / den, den))
        } else {
            // every weight underflowed: fall back to the nearest sample
            nearest_sample(samples).map(|s| (s.value, 0.0))
        }
    } else {
        Some((num, den))
    }
}

/// Effective number of samples `(Σw)²/Σw²` for a kernel.
pub fn effective_count(samples: &[NeighborSample], sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let (mut a, mut b) = (0.0, 0.0);
    for s in samples {
        let w = (-s.distance / s2).exp();
        a += w;
        b += w * w;
    }
    if b > 0.0 {
        a * a / b
    } else {
        0.0
    }
}

fn closer(a: &NeighborSample, b: &NeighborSample) -> std::cmp::Ordering {
    a.distance.total_cmp(&b.distance).then(a.frame.cmp(&b.frame)).then(a.l.cmp(&b.l)).then(a.m.cmp(&b.m))
}

/// The minimum-distance sample; ties go to the lowest frame index, then the
/// lowest `(l, m)`.
pub fn nearest_sample(samples: &[NeighborSample]) -> Option<&NeighborSample> {
    samples.iter().min_by(|a, b| closer(a, b))
}

/// Nearest-neighbour binning: the nearest sample of every contributing
/// frame, averaged with equal weights. Sub-pixel shifts between frames are
/// ignored, which is what blurs this baseline.
pub fn bin_nearest(samples: &[NeighborSample]) -> Option<f64> {
    let mut best: Vec<&NeighborSample> = Vec::new();
    for s in samples {
        match best.iter_mut().find(|b| b.frame == s.frame) {
            Some(b) => {
                if closer(s, b).is_lt() {
                    *b = s;
                }
            }
            None => best.push(s),
        }
    }
    best.sort_by_key(|s| s.frame);
    (!best.is_empty()).then(|| best.iter().map(|s| s.value).sum::<f64>() / best.len() as f64)
}
