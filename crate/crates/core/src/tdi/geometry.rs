//! Processing-side geometry: which camera model each band and frame uses.

use serde::{Deserialize, Serialize};

use crate::geom::{AttitudeProfile, Camera, LookCorrection, Mode, OrbitElements, Pose, SensorGeometry};
use crate::radiometry::Frame;

/// Geometric calibration applied during processing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometricCalibration {
    /// Band-to-band registration corrections.
    pub band_corrections: Vec<(u8, LookCorrection)>,
    /// Alignment bias plus interior calibration, common to all bands.
    pub attitude: LookCorrection,
    /// Pitch correction per degree of tilt (rad/deg) and its intercept (rad).
    pub tilt_slope: f64,
    pub tilt_intercept: f64,
}

impl GeometricCalibration {
    pub fn band(&self, band: u8) -> LookCorrection {
        self.band_corrections.iter().filter(|(b, _)| *b == band).fold(LookCorrection::default(), |a, (_, c)| a.compose(c))
    }

    pub fn set_band(&mut self, band: u8, c: LookCorrection) {
        self.band_corrections.retain(|(b, _)| *b != band);
        self.band_corrections.push((band, c));
        self.band_corrections.sort_by_key(|(b, _)| *b);
    }

    fn common(&self, tilt: f64) -> LookCorrection {
        self.attitude.compose(&LookCorrection::constant(0.0, self.tilt_slope * tilt + self.tilt_intercept))
    }

    /// Camera of one band (or the band-independent reference when `None`).
    pub fn camera(&self, sensor: &SensorGeometry, band: Option<u8>, tilt: f64) -> Camera {
        let mut c = self.common(tilt);
        if let Some(b) = band {
            c = c.compose(&self.band(b));
        }
        Camera::new(SensorGeometry { tilt_angle: tilt, ..sensor.clone() }, c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandFrames {
    pub band: u8,
    pub frames: Vec<Frame>,
}

/// Radiometrically corrected frames with their ancillary geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedStack {
    pub mode: Mode,
    pub sensor: SensorGeometry,
    pub orbit: OrbitElements,
    pub attitude: AttitudeProfile,
    pub frame_period: f64,
    pub height: f64,
    pub calibration_version: String,
    pub bands: Vec<BandFrames>,
}

impl CorrectedStack {
    pub fn pose_at(&self, t: f64) -> Pose {
        Pose::new(&self.orbit.state_at(t), self.attitude.angles_at(t))
    }

    pub fn band(&self, band: u8) -> Option<&BandFrames> {
        self.bands.iter().find(|b| b.band == band)
    }
}
