//! Frame-wise radiometric chain: dark → nonlinearity → PRNU → smear → C/D.

pub mod calib;
pub mod dark;
pub mod frame;
pub mod prnu;
pub mod smear;

pub use calib::{count_to_radiance, CalibCoeffs, NonlinLut};
pub use dark::{correct_dark, model_dark, DarkEstimate, DarkReference, DarkRow};
pub use frame::{Frame, FrameStack, RawFrame};
pub use prnu::{apply_prnu, estimate_prnu, PrnuOptions, PrnuTable};
pub use smear::{apply_smear, build_smear_weights, correct_smear, SmearModel, SmearParams};

use crate::error::Result;

/// Everything needed to take one band's raw frames to radiance.
#[derive(Debug, Clone)]
pub struct BandChain<'a> {
    pub dark: &'a DarkReference,
    /// Seconds around a frame within which shielded rows are averaged.
    pub dark_window: f64,
    pub prnu: &'a PrnuTable,
    pub smear: Option<&'a SmearModel>,
    pub coeffs: &'a CalibCoeffs,
}

/// Dark subtraction, nonlinearity, PRNU, desmearing and `C`/`D`, in that order.
pub fn linearize(
    raw: &RawFrame,
    dark: &[f64],
    prnu: &PrnuTable,
    smear: Option<&SmearModel>,
    coeffs: &CalibCoeffs,
) -> Result<Frame> {
    coeffs.check(raw.band, raw.rows)?;
    let mut f = correct_dark(raw, dark)?;
    if !coeffs.nonlin.is_identity() {
        f.data.iter_mut().for_each(|v| *v = coeffs.nonlin.eval(*v));
    }
    let mut f = apply_prnu(&f, prnu)?;
    if let Some(s) = smear {
        f = correct_smear(&f, s)?;
    }
    calib::apply_gain_offset(&mut f, coeffs)?;
    Ok(f)
}

/// Full correction of one raw frame given the band's shielded rows.
pub fn correct_frame(raw: &RawFrame, dark_rows: &[DarkRow], chain: &BandChain) -> Result<(Frame, DarkEstimate)> {
    let est = model_dark(dark_rows, chain.dark, raw.start_time, chain.dark_window, raw.cols)?;
    let f = linearize(raw, &est.values, chain.prnu, chain.smear, chain.coeffs)?;
    Ok((f, est))
}
