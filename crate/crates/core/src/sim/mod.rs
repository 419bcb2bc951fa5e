//! Synthetic acquisitions with injectable effects and exact truth.

pub mod acquisition;
pub mod effects;
pub mod scene;

pub use acquisition::{night_dark_rows, simulate_acquisition, AcquisitionConfig, BandTruth, FrameTruth, TiltSchedule, TruthBundle};
pub use effects::{
    inject_band_misalignment, inject_geolocation_bias, inject_tilt_drift, BandMisalignment, DarkEffect, EffectsConfig,
    NoiseModel, PrnuEffect, TiltDrift,
};
pub use scene::{generate_scene, Extent, Field, PointTarget, Scene, TextureParams, UniformPatch};
