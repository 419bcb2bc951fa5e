//! Calibration steps that update a calibration set from acquisitions:
//! band-to-band registration, then geolocation bias, then tilt drift.

use super::calibration_set::CalibrationSet;
use super::pipeline::{process, processing_platform, select_bands};
use crate::error::{domain, Result};
use crate::geocal::{
    calibrate_geolocation, estimate_bbr, estimate_geolocation_error, fit_tilt_drift, AttitudeCorrection, BbrOptions,
    BbrProfile, CalibrationOptions, GeolocationOptions, GeolocationReport, Raster, TiltDriftModel, REFERENCE_BAND,
};
use crate::radiometry::FrameStack;
use crate::tdi::{Level, ProductGrid, TdiConfig};

/// Reference radiance at geodetic `(lat, lon)` in degrees.
pub type Reference<'a> = &'a (dyn Fn(f64, f64) -> Option<f64> + Sync);

fn bump(cal: &CalibrationSet, step: &str) -> CalibrationSet {
    let mut next = cal.clone();
    next.version = format!("{}+{step}", cal.version);
    next
}

/// Measures registration of every band against the reference band on an
/// L1B product and folds the corrections into the set.
pub fn calibrate_bbr(
    stack: &FrameStack,
    cal: &CalibrationSet,
    tdi: &TdiConfig,
    opts: &BbrOptions,
) -> Result<(CalibrationSet, Vec<BbrProfile>)> {
    if !stack.bands().contains(&REFERENCE_BAND) {
        return Err(domain(format!("registration needs reference band {REFERENCE_BAND}")));
    }
    let product = process(stack, cal, &TdiConfig { level: Level::L1b, ..tdi.clone() })?;
    let platform = processing_platform(stack, cal, None);
    let profiles = estimate_bbr(&product, REFERENCE_BAND, &platform, opts)?;
    let mut next = bump(cal, "bbr");
    for p in profiles.iter().filter(|p| p.band != REFERENCE_BAND) {
        let c = next.geometry.band(p.band).compose(&p.correction);
        next.geometry.set_band(p.band, c);
        let interp = p.interpolated.iter().filter(|&&f| f).count();
        next.provenance.push(format!(
            "bbr band {}: along fit {:?} px, across fit {:?} px, {} interpolated bins",
            p.band, p.along_fit, p.across_fit, interp
        ));
    }
    Ok((next, profiles))
}

/// Processes one band to L1B and measures its geolocation against the
/// reference.
pub fn measure_geolocation(
    stack: &FrameStack,
    cal: &CalibrationSet,
    tdi: &TdiConfig,
    band: u8,
    reference: Reference,
    opts: &GeolocationOptions,
) -> Result<(ProductGrid, GeolocationReport)> {
    let single = select_bands(stack, &[band]);
    let product = process(&single, cal, &TdiConfig { level: Level::L1b, ..tdi.clone() })?;
    let reference = Raster::resample_at(&product, reference);
    let platform = processing_platform(stack, cal, Some(band));
    let report = estimate_geolocation_error(&product, &reference, band, &platform, opts)?;
    Ok((product, report))
}

/// Estimates alignment bias and interior calibration and folds them into
/// the set.
pub fn calibrate_geolocation_set(
    stack: &FrameStack,
    cal: &CalibrationSet,
    tdi: &TdiConfig,
    band: u8,
    reference: Reference,
    geo: &GeolocationOptions,
    opts: &CalibrationOptions,
) -> Result<(CalibrationSet, GeolocationReport, AttitudeCorrection)> {
    let (_, report) = measure_geolocation(stack, cal, tdi, band, reference, geo)?;
    let corr = calibrate_geolocation(&report.field, opts)?;
    let mut next = bump(cal, "geo");
    next.geometry.attitude = next.geometry.attitude.compose(&corr.look_correction());
    next.provenance.push(format!(
        "geolocation band {band}: median along {:.1} m, across {:.1} m; bias roll {:.4e} pitch {:.4e} rad",
        report.metres.along.median, report.metres.across.median, corr.roll, corr.pitch
    ));
    Ok((next, report, corr))
}

/// Fits pitch residual against tilt over acquisitions at several tilt
/// settings and folds the drift model into the set.
pub fn calibrate_tilt_drift(
    stacks: &[FrameStack],
    cal: &CalibrationSet,
    tdi: &TdiConfig,
    band: u8,
    reference: Reference,
    geo: &GeolocationOptions,
) -> Result<(CalibrationSet, TiltDriftModel, Vec<(f64, f64)>)> {
    let opts = CalibrationOptions { interior: false, ..CalibrationOptions::default() };
    let mut samples = Vec::with_capacity(stacks.len());
    for stack in stacks {
        let tilt = stack.frames.first().map(|f| f.tilt_angle).ok_or_else(|| domain("empty stack"))?;
        let (_, report) = measure_geolocation(stack, cal, tdi, band, reference, geo)?;
        let corr = calibrate_geolocation(&report.field, &opts)?;
        samples.push((tilt, corr.pitch));
    }
    let model = fit_tilt_drift(&samples)?;
    let mut next = bump(cal, "tilt");
    next.geometry.tilt_slope += model.slope;
    next.geometry.tilt_intercept += model.intercept;
    next.provenance.push(format!(
        "tilt drift over {} acquisitions: slope {:.4e} rad/deg, intercept {:.4e} rad",
        samples.len(),
        model.slope,
        model.intercept
    ));
    Ok((next, model, samples))
}
