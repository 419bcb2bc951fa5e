//! Everything the processor needs to turn counts into geolocated radiance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mode, SensorGeometry};
use crate::radiometry::{CalibCoeffs, DarkReference, FrameStack, PrnuTable, SmearParams};
use crate::sim::TruthBundle;
use crate::tdi::GeometricCalibration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub version: String,
    pub mode: Mode,
    /// Sensor geometry the set was derived for (tilt ignored when matching).
    pub sensor: SensorGeometry,
    pub dark: Vec<DarkReference>,
    /// Seconds around a frame within which shielded rows are averaged.
    pub dark_window: f64,
    pub prnu: Vec<PrnuTable>,
    pub coeffs: Vec<CalibCoeffs>,
    pub smear: Option<SmearParams>,
    pub geometry: GeometricCalibration,
    /// Free-text provenance lines (input products, times, procedures).
    pub provenance: Vec<String>,
}

impl CalibrationSet {
    /// Unit gains, zero dark, no smear, nominal geometry.
    pub fn nominal(stack: &FrameStack, gain: f64, offset: f64) -> Self {
        let rows = stack.mode.frame_rows(&stack.sensor);
        let cols = stack.mode.frame_cols(&stack.sensor);
        let bands = stack.bands();
        CalibrationSet {
            version: "nominal".into(),
            mode: stack.mode,
            sensor: stack.sensor.clone(),
            dark: Vec::new(),
            dark_window: 4.0 * stack.frame_period,
            prnu: bands.iter().map(|&b| PrnuTable::unity(b, cols)).collect(),
            coeffs: bands.iter().map(|&b| CalibCoeffs::uniform(b, rows, gain, offset)).collect(),
            smear: None,
            geometry: GeometricCalibration::default(),
            provenance: vec!["nominal defaults".into()],
        }
    }

    /// The exact radiometric calibration the simulator injected; geometry
    /// stays nominal (it is what geometric calibration has to find).
    pub fn from_truth(stack: &FrameStack, truth: &TruthBundle) -> Result<Self> {
        let mut set = CalibrationSet::nominal(stack, truth.config.gain, truth.config.offset);
        set.version = format!("truth-{}", truth.config.seed);
        if let Some(d) = &truth.effects.dark {
            let width = d.width.unwrap_or(truth.dark_night.len()).min(truth.dark_night.len());
            let cadence = truth.config.dark_cadence(d);
            set.dark_window = cadence as f64 * truth.frame_period;
            for &b in &stack.bands() {
                set.dark.push(DarkReference::new(b, truth.dark_night[..width].to_vec(), d.port_biases.len())?);
            }
        }
        for t in &truth.bands {
            let gains = truth.prnu_gains(t.band).expect("band present");
            let dead = t.prnu_response.iter().map(|&r| r <= 0.0).collect();
            set.prnu.retain(|p| p.band != t.band);
            set.prnu.push(PrnuTable { band: t.band, gains, dead });
        }
        for c in set.coeffs.iter_mut() {
            c.nonlin = truth.nonlin.clone();
        }
        if truth.effects.smear {
            set.smear = Some(SmearParams::new(stack.mode, stack.integration_time));
        }
        set.provenance.push("simulator truth".into());
        Ok(set)
    }

    pub fn dark_for(&self, band: u8) -> Option<&DarkReference> {
        self.dark.iter().find(|d| d.band == band)
    }

    pub fn prnu_for(&self, band: u8) -> Result<&PrnuTable> {
        self.prnu.iter().find(|p| p.band == band).ok_or_else(|| Error::CalibrationMissing(format!("no PRNU table for band {band}")))
    }

    pub fn coeffs_for(&self, band: u8) -> Result<&CalibCoeffs> {
        self.coeffs.iter().find(|c| c.band == band).ok_or_else(|| Error::CalibrationMissing(format!("no coefficients for band {band}")))
    }

    /// Rejects a set derived for a different camera or mode.
    pub fn check_compatible(&self, stack: &FrameStack) -> Result<()> {
        let a = SensorGeometry { tilt_angle: 0.0, ..self.sensor.clone() };
        let b = SensorGeometry { tilt_angle: 0.0, ..stack.sensor.clone() };
        if a != b {
            return Err(Error::CalibrationRejected("calibration set was derived for a different sensor geometry".into()));
        }
        if self.mode != stack.mode {
            return Err(Error::CalibrationRejected(format!("calibration set is for {} data, stack is {}", self.mode, stack.mode)));
        }
        Ok(())
    }
}
