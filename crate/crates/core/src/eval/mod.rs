//! Image-quality evaluation: SNR, power spectra, multi-temporal registration.

pub mod multitemporal;
pub mod snr;
pub mod spectrum;

pub use multitemporal::{multitemporal_accuracy, MultitemporalReport};
pub use snr::{measure_snr, region_stats, snr_report, Region, SnrEntry, SnrReport};
pub use spectrum::{power_spectrum_ratio, radial_spectrum, SpectrumReport, SPECTRUM_BINS};
