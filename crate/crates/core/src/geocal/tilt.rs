//! Pitch drift as a linear function of payload tilt.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TiltDriftModel {
    /// Pitch residual per degree of tilt (rad/deg).
    pub slope: f64,
    /// rad.
    pub intercept: f64,
    pub residual_rms: f64,
    pub count: usize,
}

impl TiltDriftModel {
    pub fn predict(&self, tilt_deg: f64) -> f64 {
        self.slope * tilt_deg + self.intercept
    }

    /// Measured pitch with the modelled drift removed.
    pub fn correct(&self, tilt_deg: f64, pitch: f64) -> f64 {
        pitch - self.predict(tilt_deg)
    }
}

/// Least-squares line through `(tilt deg, pitch residual rad)` pairs.
pub fn fit_tilt_drift(samples: &[(f64, f64)]) -> Result<TiltDriftModel> {
    if samples.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
        return Err(domain("tilt samples must be finite"));
    }
    let mut tilts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    tilts.sort_by(f64::total_cmp);
    tilts.dedup();
    if tilts.len() < 3 {
        return Err(domain(format!("tilt drift needs at least 3 distinct tilts, got {}", tilts.len())));
    }
    let n = samples.len() as f64;
    let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mp = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let stt: f64 = samples.iter().map(|s| (s.0 - mt).powi(2)).sum();
    let stp: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - mp)).sum();
    let slope = stp / stt;
    let intercept = mp - slope * mt;
    let ss: f64 = samples.iter().map(|s| (s.1 - slope * s.0 - intercept).powi(2)).sum();
    Ok(TiltDriftModel { slope, intercept, residual_rms: (ss / n).sqrt(), count: samples.len() })
}
