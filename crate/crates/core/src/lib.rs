//! Level-0 to Level-1 processing for a frame-transfer ocean-colour camera.
//!
//! * [`geom`] — rigorous pixel ↔ ground model, virtual linear sensor, LCC.
//! * [`radiometry`] — dark, PRNU, frame-transfer smear, count → radiance.
//! * [`tdi`] — ground time-delay integration onto L1B/L1C grids.
//! * [`geocal`] — tie-point matching, band-to-band registration,
//!   geolocation and tilt-drift calibration.
//! * [`sim`] — synthetic acquisition with injectable effects and truth.
//! * [`eval`] — SNR, power spectra, multi-temporal registration.
//! * [`products`] — container format, run configuration, calibration sets.

pub mod error;
pub mod eval;
pub mod geocal;
pub mod geom;
pub mod products;
pub mod radiometry;
pub mod sim;
pub mod tdi;

mod fft;

pub use error::{Error, ErrorClass, Result};
