//! The processing chain: raw frames → radiance frames → L1B/L1C.

use rayon::prelude::*;

use super::calibration_set::CalibrationSet;
use crate::error::Result;
use crate::geom::Platform;
use crate::radiometry::{build_smear_weights, correct_frame, linearize, BandChain, DarkRow, Frame, FrameStack};
use crate::tdi::{run_tdi, BandFrames, CorrectedStack, ProductGrid, TdiConfig};

/// Radiometric correction of every frame.
pub fn radiometric_correction(stack: &FrameStack, cal: &CalibrationSet) -> Result<CorrectedStack> {
    stack.validate()?;
    cal.check_compatible(stack)?;
    let smear = match &cal.smear {
        Some(p) => Some(build_smear_weights(p)?),
        None => None,
    };
    let mut bands = Vec::new();
    for band in stack.bands() {
        let raws = stack.band_frames(band);
        let prnu = cal.prnu_for(band)?;
        let coeffs = cal.coeffs_for(band)?;
        let frames: Vec<Frame> = match cal.dark_for(band) {
            Some(dark) => {
                let rows = DarkRow::from_frames(&raws);
                let chain = BandChain { dark, dark_window: cal.dark_window, prnu, smear: smear.as_ref(), coeffs };
                raws.par_iter().map(|r| correct_frame(r, &rows, &chain).map(|(f, _)| f)).collect::<Result<_>>()?
            }
            None => raws
                .par_iter()
                .map(|r| linearize(r, &vec![0.0; r.cols], prnu, smear.as_ref(), coeffs))
                .collect::<Result<_>>()?,
        };
        bands.push(BandFrames { band, frames });
    }
    Ok(CorrectedStack {
        mode: stack.mode,
        sensor: stack.sensor.clone(),
        orbit: stack.orbit,
        attitude: stack.attitude.clone(),
        frame_period: stack.frame_period,
        height: stack.height,
        calibration_version: cal.version.clone(),
        bands,
    })
}

/// Radiometry then TDI with the set's geometric calibration.
pub fn process(stack: &FrameStack, cal: &CalibrationSet, cfg: &TdiConfig) -> Result<ProductGrid> {
    let corrected = radiometric_correction(stack, cal)?;
    run_tdi(&corrected, &cal.geometry, cfg)
}

/// The stack restricted to some bands.
pub fn select_bands(stack: &FrameStack, bands: &[u8]) -> FrameStack {
    FrameStack { frames: stack.frames.iter().filter(|f| bands.contains(&f.band)).cloned().collect(), ..stack.clone() }
}

/// Processing-side geometry of a stack: telemetry attitude and the set's
/// calibrated camera for `band` (or the band-independent camera).
pub fn processing_platform(stack: &FrameStack, cal: &CalibrationSet, band: Option<u8>) -> Platform {
    let tilt = stack.frames.first().map(|f| f.tilt_angle).unwrap_or(stack.sensor.tilt_angle);
    Platform {
        camera: cal.geometry.camera(&stack.sensor, band, tilt),
        orbit: stack.orbit,
        attitude: stack.attitude.clone(),
        height: stack.height,
    }
}
