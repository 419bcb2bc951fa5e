//! Calibration sets, the processing chain, run configuration and the
//! container format.

pub mod calibrate;
pub mod calibration_set;
pub mod config;
pub mod container;
pub mod pipeline;

pub use calibrate::{calibrate_bbr, calibrate_geolocation_set, calibrate_tilt_drift, measure_geolocation, Reference};
pub use calibration_set::CalibrationSet;
pub use config::{CalibrationConfig, EvalConfig, Paths, RunConfig};
pub use container::{export_flat, read_json, write_json, Container, ContainerKind, Persist, SectionData, FORMAT_VERSION, MAGIC};
pub use pipeline::{process, processing_platform, radiometric_correction, select_bands};
