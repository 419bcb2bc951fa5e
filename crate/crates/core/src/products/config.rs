//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Region;
use crate::geocal::{BbrOptions, CalibrationOptions, GeolocationOptions};
use crate::sim::{AcquisitionConfig, EffectsConfig, TextureParams};
use crate::tdi::TdiConfig;

/// Where the chain reads and writes its artefacts, relative to the
/// configuration file unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub scene: PathBuf,
    pub raw: PathBuf,
    pub truth: PathBuf,
    pub calibration: PathBuf,
    pub product: PathBuf,
    pub report: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            scene: "scene.l1c".into(),
            raw: "raw.l1c".into(),
            truth: "truth.json".into(),
            calibration: "calibration.l1c".into(),
            product: "product.l1c".into(),
            report: "report.txt".into(),
        }
    }
}

/// Calibration procedure settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub bbr: BbrOptions,
    pub geolocation: GeolocationOptions,
    pub attitude: CalibrationOptions,
    /// Band carrying geolocation.
    pub geolocation_band: Option<u8>,
}

/// Evaluation settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Uniform region for SNR; the centre of the product when absent.
    pub snr_region: Option<Region>,
    /// Required SNR per band, e.g. `{ "7" = 800.0 }`.
    pub snr_thresholds: std::collections::BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Degrees of scene margin around the acquisition footprint.
    pub scene_margin: f64,
    pub acquisition: AcquisitionConfig,
    pub effects: EffectsConfig,
    pub texture: TextureParams,
    pub tdi: TdiConfig,
    pub calibration: CalibrationConfig,
    pub eval: EvalConfig,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            scene_margin: 0.1,
            acquisition: AcquisitionConfig::default(),
            effects: EffectsConfig::default(),
            texture: TextureParams::default(),
            tdi: TdiConfig::default(),
            calibration: CalibrationConfig::default(),
            eval: EvalConfig::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.paths.rebase(dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.acquisition.validate().map_err(wrap)?;
        self.effects.validate().map_err(wrap)?;
        self.tdi.validate().map_err(wrap)?;
        if !(self.scene_margin >= 0.0 && self.scene_margin < 10.0) {
            return Err(Error::Config(format!("scene margin {} deg out of range", self.scene_margin)));
        }
        Ok(())
    }
}

impl Paths {
    pub fn rebase(&mut self, dir: &Path) {
        for p in [&mut self.scene, &mut self.raw, &mut self.truth, &mut self.calibration, &mut self.product, &mut self.report] {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}
