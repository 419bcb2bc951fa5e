//! Injectable instrument and platform effects. Everything defaults to off.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::LookCorrection;
use crate::radiometry::NonlinLut;

/// Sanity bound on any injected angle (rad).
pub const MAX_INJECTED_ANGLE: f64 = 2.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DarkEffect {
    /// Mean dark level (counts).
    pub level: f64,
    /// Std of the fixed column pattern (counts).
    pub ripple: f64,
    /// Additive bias per readout port (counts); its length sets the port count.
    pub port_biases: Vec<f64>,
    /// Port biases during the night reference session.
    pub night_port_biases: Vec<f64>,
    /// Read noise on shielded-row samples (counts).
    pub noise: f64,
    /// Shielded-row width in columns; defaults to the frame width.
    pub width: Option<usize>,
    /// Frames between shielded-row samples; defaults to 4 (LAC) / 12 (GAC).
    pub cadence: Option<usize>,
}

impl Default for DarkEffect {
    fn default() -> Self {
        DarkEffect {
            level: 100.0,
            ripple: 3.0,
            port_biases: vec![0.0; 4],
            night_port_biases: vec![0.0; 4],
            noise: 1.0,
            width: None,
            cadence: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrnuEffect {
    /// RMS of the multiplicative column stripes.
    pub rms: f64,
    /// Columns with zero response.
    pub dead_columns: Vec<usize>,
}

/// Per-sample noise in counts: variance = read² + shot·signal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub read: f64,
    pub shot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandMisalignment {
    pub band: u8,
    pub correction: LookCorrection,
}

/// Pitch error growing linearly with payload tilt.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiltDrift {
    /// rad per deg of tilt.
    pub slope: f64,
    /// rad.
    pub intercept: f64,
}

impl TiltDrift {
    pub fn pitch_error(&self, tilt_deg: f64) -> f64 {
        self.slope * tilt_deg + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EffectsConfig {
    pub dark: Option<DarkEffect>,
    pub prnu: Option<PrnuEffect>,
    pub smear: bool,
    pub noise: Option<NoiseModel>,
    /// Detector nonlinearity; the raw output is its inverse of the linear signal.
    pub nonlin: Option<NonlinLut>,
    pub misalignment: Vec<BandMisalignment>,
    /// Unmodelled (roll, pitch) attitude bias (rad).
    pub attitude_bias: [f64; 2],
    pub tilt_drift: TiltDrift,
    /// Random per-frame attitude jitter, std per axis (deg).
    pub jitter: f64,
}

impl EffectsConfig {
    /// Every effect off: an ideal camera.
    pub fn ideal() -> Self {
        EffectsConfig::default()
    }

    pub fn misalignment_for(&self, band: u8) -> LookCorrection {
        self.misalignment.iter().filter(|m| m.band == band).fold(LookCorrection::default(), |acc, m| acc.compose(&m.correction))
    }

    pub fn validate(&self) -> Result<()> {
        check_angle(self.attitude_bias[0])?;
        check_angle(self.attitude_bias[1])?;
        check_angle(self.tilt_drift.pitch_error(20.0))?;
        check_angle(self.tilt_drift.pitch_error(-20.0))?;
        for m in &self.misalignment {
            check_correction(&m.correction)?;
        }
        if let Some(d) = &self.dark {
            if d.port_biases.is_empty() || d.night_port_biases.len() != d.port_biases.len() {
                return Err(domain("dark port bias tables must be non-empty and of equal length"));
            }
        }
        if let Some(n) = &self.nonlin {
            n.validate()?;
        }
        Ok(())
    }
}

fn check_angle(a: f64) -> Result<()> {
    if !(a.abs() < MAX_INJECTED_ANGLE) {
        return Err(domain(format!("injected angle {a} rad exceeds the 2° sanity bound")));
    }
    Ok(())
}

fn check_correction(c: &LookCorrection) -> Result<()> {
    for xi in [-1.0, 0.0, 1.0] {
        let (r, p) = c.angles(xi);
        check_angle(r)?;
        check_angle(p)?;
    }
    Ok(())
}

pub fn inject_geolocation_bias(effects: &mut EffectsConfig, roll: f64, pitch: f64) -> Result<()> {
    check_angle(roll)?;
    check_angle(pitch)?;
    effects.attitude_bias = [roll, pitch];
    Ok(())
}

pub fn inject_tilt_drift(effects: &mut EffectsConfig, slope: f64, intercept: f64) -> Result<()> {
    let d = TiltDrift { slope, intercept };
    check_angle(d.pitch_error(20.0))?;
    check_angle(d.pitch_error(-20.0))?;
    effects.tilt_drift = d;
    Ok(())
}

pub fn inject_band_misalignment(effects: &mut EffectsConfig, band: u8, profile: LookCorrection) -> Result<()> {
    check_correction(&profile)?;
    effects.misalignment.retain(|m| m.band != band);
    effects.misalignment.push(BandMisalignment { band, correction: profile });
    Ok(())
}
