//! Flies the camera over a scene and renders raw frames plus truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::effects::{DarkEffect, EffectsConfig};
use super::scene::{Extent, Scene};
use crate::error::{domain, Result};
use crate::geom::ellipsoid::ecef_to_geodetic;
use crate::geom::{
    AttitudeProfile, AttitudeState, Camera, GroundPoint, LookCorrection, Mode, OrbitElements, Platform, Pose,
    SensorGeometry, Vec3,
};
use crate::radiometry::{apply_smear, build_smear_weights, Frame, FrameStack, NonlinLut, RawFrame, SmearParams};

/// Payload tilt as a function of time: `start + rate·(t − t0)` (deg, deg/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiltSchedule {
    pub start: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionConfig {
    pub mode: Mode,
    pub sensor: SensorGeometry,
    pub orbit: OrbitElements,
    /// Nominal (telemetered) attitude at `start_time`, including drift rate.
    pub attitude: AttitudeState,
    pub start_time: f64,
    pub num_frames: usize,
    /// Along-track ground advance between frames, in binned rows at the
    /// array centre.
    pub advance: f64,
    /// Integration time (ms).
    pub integration_time: f64,
    pub bands: Vec<u8>,
    pub tilt: TiltSchedule,
    /// Terrain height (m).
    pub height: f64,
    /// Radiance per count (`C`) and radiance offset (`D`) of the true instrument.
    pub gain: f64,
    pub offset: f64,
    pub seed: u64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        AcquisitionConfig {
            mode: Mode::Lac,
            sensor: SensorGeometry::default(),
            orbit: OrbitElements::default(),
            attitude: AttitudeState::default(),
            start_time: 0.0,
            num_frames: 40,
            advance: 1.06,
            integration_time: 64.0,
            bands: vec![7],
            tilt: TiltSchedule::default(),
            height: 0.0,
            gain: 0.05,
            offset: 0.0,
            seed: 1,
        }
    }
}

impl AcquisitionConfig {
    pub fn tilt_at(&self, t: f64) -> f64 {
        self.tilt.start + self.tilt.rate * (t - self.start_time)
    }

    pub fn telemetry(&self) -> AttitudeProfile {
        AttitudeProfile::constant(AttitudeState { epoch: self.start_time, ..self.attitude })
    }

    fn camera(&self, tilt: f64, correction: LookCorrection) -> Camera {
        Camera::new(SensorGeometry { tilt_angle: tilt, ..self.sensor.clone() }, correction)
    }

    /// Nominal platform (telemetry attitude, no errors) at the start tilt.
    pub fn nominal_platform(&self) -> Platform {
        Platform {
            camera: self.camera(self.tilt.start, LookCorrection::default()),
            orbit: self.orbit,
            attitude: self.telemetry(),
            height: self.height,
        }
    }

    /// Seconds between frames so the ground advances `advance` binned rows
    /// at the array centre.
    pub fn frame_period(&self) -> Result<f64> {
        let p = self.nominal_platform();
        let s = &self.sensor;
        let (r0, c) = ((s.active_rows as f64 - 1.0) / 2.0, (s.active_cols as f64 - 1.0) / 2.0);
        let g = p.pixel_to_ground(self.start_time, r0, c)?;
        let b = self.mode.row_binning() as f64;
        let (t1, _, _) = p.ground_to_pixel(&g, (self.start_time - 1.0, self.start_time + 10.0), r0 + b)?;
        Ok(self.advance * (t1 - self.start_time))
    }

    pub fn frame_time(&self, k: usize, period: f64) -> f64 {
        self.start_time + k as f64 * period
    }

    pub fn dark_cadence(&self, dark: &DarkEffect) -> usize {
        dark.cadence.unwrap_or(match self.mode {
            Mode::Lac => 4,
            Mode::Gac => 12,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.orbit.validate()?;
        if self.num_frames == 0 || self.bands.is_empty() {
            return Err(domain("acquisition needs frames and bands"));
        }
        if self.bands.iter().any(|b| !(1..=13).contains(b)) {
            return Err(domain("bands must be 1–13"));
        }
        if !(self.advance > 0.0 && self.gain > 0.0) {
            return Err(domain("advance and gain must be positive"));
        }
        Ok(())
    }

    /// Ground points bounding the acquisition footprint (frame corners).
    pub fn footprint(&self) -> Result<Vec<GroundPoint>> {
        let period = self.frame_period()?;
        let mut p = self.nominal_platform();
        let s = &self.sensor;
        let (rmax, cmax) = (s.active_rows as f64 - 0.5, s.active_cols as f64 - 0.5);
        let mut out = Vec::new();
        for k in [0, self.num_frames - 1] {
            let t = self.frame_time(k, period);
            p.camera = self.camera(self.tilt_at(t), LookCorrection::default());
            for (r, c) in [(-0.5, -0.5), (-0.5, cmax), (rmax, -0.5), (rmax, cmax), (-0.5, cmax / 2.0), (rmax, cmax / 2.0)] {
                out.push(p.pixel_to_ground(t, r, c)?);
            }
        }
        Ok(out)
    }

    /// Scene extent covering the footprint with a margin (deg).
    pub fn scene_extent(&self, margin_deg: f64) -> Result<Extent> {
        Ok(Extent::around(&self.footprint()?, margin_deg))
    }
}

/// True geometry of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTruth {
    pub seq: usize,
    pub time: f64,
    pub position: Vec3,
    /// True (roll, pitch, yaw).
    pub angles: [f64; 3],
    pub tilt: f64,
    /// Ground point of the array centre under the true geometry.
    pub center: GroundPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTruth {
    pub band: u8,
    /// Multiplicative response per binned column; the ideal correction is its reciprocal.
    pub prnu_response: Vec<f64>,
    pub misalignment: LookCorrection,
}

/// Everything injected, sufficient to score any inverse step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthBundle {
    pub config: AcquisitionConfig,
    pub effects: EffectsConfig,
    pub frame_period: f64,
    pub frames: Vec<FrameTruth>,
    pub bands: Vec<BandTruth>,
    /// Actual daytime dark level per binned column (counts), port biases included.
    pub dark_actual: Vec<f64>,
    /// Night-session dark profile per binned column.
    pub dark_night: Vec<f64>,
    pub nonlin: NonlinLut,
    /// Detector samples that fell outside the scene.
    pub outside_samples: usize,
}

impl TruthBundle {
    pub fn band(&self, band: u8) -> Option<&BandTruth> {
        self.bands.iter().find(|b| b.band == band)
    }

    /// Ideal correction gains (`1/response`, mean 1 by construction).
    pub fn prnu_gains(&self, band: u8) -> Option<Vec<f64>> {
        self.band(band).map(|b| b.prnu_response.iter().map(|&r| if r > 0.0 { 1.0 / r } else { 1.0 }).collect())
    }

    pub fn true_platform(&self, k: usize, band: u8) -> (Pose, Camera) {
        let f = &self.frames[k];
        let orbit = self.config.orbit.state_at(f.time);
        let pose = Pose::new(&orbit, f.angles);
        let corr = self.band(band).map(|b| b.misalignment).unwrap_or_default();
        (pose, self.config.camera(f.tilt, corr))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_STATIC: u64 = 1 << 40;

fn dark_profiles(cfg: &AcquisitionConfig, dark: &DarkEffect, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream_rng(cfg.seed, STREAM_STATIC + 1);
    let pattern: Vec<f64> = (0..cols).map(|_| dark.ripple * rng.sample::<f64, _>(StandardNormal)).collect();
    let ports = dark.port_biases.len();
    let port = |j: usize| (j * ports / cols).min(ports - 1);
    let actual = (0..cols).map(|j| dark.level + pattern[j] + dark.port_biases[port(j)]).collect();
    let night = (0..cols).map(|j| dark.level + pattern[j] + dark.night_port_biases[port(j)]).collect();
    (actual, night)
}

fn prnu_response(cfg: &AcquisitionConfig, effects: &EffectsConfig, band: u8, cols: usize) -> Vec<f64> {
    let Some(p) = &effects.prnu else { return vec![1.0; cols] };
    let mut rng = stream_rng(cfg.seed, STREAM_STATIC + 100 + band as u64);
    let mut g: Vec<f64> = (0..cols).map(|_| 1.0 + p.rms * rng.sample::<f64, _>(StandardNormal)).collect();
    let mean = g.iter().sum::<f64>() / cols as f64;
    g.iter_mut().for_each(|v| *v /= mean);
    let mut r: Vec<f64> = g.iter().map(|v| 1.0 / v).collect();
    for &d in &p.dead_columns {
        if d < cols {
            r[d] = 0.0;
        }
    }
    r
}

/// Shielded rows from a night session (no illumination), for building the
/// dark reference.
pub fn night_dark_rows(cfg: &AcquisitionConfig, effects: &EffectsConfig, count: usize) -> Result<Vec<Vec<u16>>> {
    let dark = effects.dark.as_ref().ok_or_else(|| domain("dark effect is disabled"))?;
    let cols = cfg.mode.frame_cols(&cfg.sensor);
    let width = dark.width.unwrap_or(cols).min(cols);
    let (_, night) = dark_profiles(cfg, dark, cols);
    let max = cfg.mode.max_count() as f64;
    let mut rng = stream_rng(cfg.seed, STREAM_STATIC + 2);
    Ok((0..count)
        .map(|_| {
            (0..width)
                .map(|j| (night[j] + dark.noise * rng.sample::<f64, _>(StandardNormal)).round().clamp(0.0, max) as u16)
                .collect()
        })
        .collect())
}

/// Renders a frame stack over `scene` with the given effects.
pub fn simulate_acquisition(scene: &Scene, cfg: &AcquisitionConfig, effects: &EffectsConfig) -> Result<(FrameStack, TruthBundle)> {
    cfg.validate()?;
    effects.validate()?;
    for b in &cfg.bands {
        if scene.band_index(*b).is_none() {
            return Err(domain(format!("scene has no band {b}")));
        }
    }
    let mode = cfg.mode;
    let sensor = &cfg.sensor;
    let rows = mode.frame_rows(sensor);
    let cols = mode.frame_cols(sensor);
    let (br, bc) = (mode.row_binning(), mode.col_binning());
    let period = cfg.frame_period()?;
    if cfg.integration_time * 1e-3 > period {
        log::warn!("integration time {} ms exceeds the frame period {:.1} ms", cfg.integration_time, period * 1e3);
    }
    let smear = if effects.smear {
        Some(build_smear_weights(&SmearParams::new(mode, cfg.integration_time))?)
    } else {
        None
    };
    let (dark_actual, dark_night) = match &effects.dark {
        Some(d) => dark_profiles(cfg, d, cols),
        None => (vec![0.0; cols], vec![0.0; cols]),
    };
    let band_truth: Vec<BandTruth> = cfg
        .bands
        .iter()
        .map(|&b| BandTruth { band: b, prnu_response: prnu_response(cfg, effects, b, cols), misalignment: effects.misalignment_for(b) })
        .collect();
    let nonlin = effects.nonlin.clone().unwrap_or_default();
    let telemetry = cfg.telemetry();
    let max = mode.max_count() as f64;

    let rendered: Vec<Result<(FrameTruth, Vec<RawFrame>, usize)>> = (0..cfg.num_frames)
        .into_par_iter()
        .map(|k| {
            let t = cfg.frame_time(k, period);
            let tilt = cfg.tilt_at(t);
            let mut rng = stream_rng(cfg.seed, k as u64);
            let jitter = effects.jitter.to_radians();
            let mut angles = telemetry.angles_at(t);
            angles[0] += effects.attitude_bias[0];
            angles[1] += effects.attitude_bias[1] + effects.tilt_drift.pitch_error(tilt);
            for a in angles.iter_mut() {
                if jitter > 0.0 {
                    *a += jitter * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let orbit = cfg.orbit.state_at(t);
            let pose = Pose::new(&orbit, angles);
            let centre = cfg.camera(tilt, LookCorrection::default());
            let center = pose.pixel_to_ground(
                &centre,
                (sensor.active_rows as f64 - 1.0) / 2.0,
                (sensor.active_cols as f64 - 1.0) / 2.0,
                cfg.height,
            )?;
            let truth = FrameTruth { seq: k, time: t, position: orbit.position, angles, tilt, center };
            let mut frames = Vec::with_capacity(cfg.bands.len());
            let mut outside = 0usize;
            let mut cached: Option<(LookCorrection, Vec<Option<(f64, f64)>>)> = None;
            for (bi, &band) in cfg.bands.iter().enumerate() {
                let bt = &band_truth[bi];
                let sidx = scene.band_index(band).expect("checked");
                if cached.as_ref().map(|c| c.0 != bt.misalignment).unwrap_or(true) {
                    let cam = cfg.camera(tilt, bt.misalignment);
                    let mut ll = Vec::with_capacity(sensor.active_rows * sensor.active_cols);
                    for r in 0..sensor.active_rows {
                        for c in 0..sensor.active_cols {
                            let dir = pose.direction(&cam, r as f64, c as f64);
                            ll.push(crate::geom::ellipsoid::intersect_height(&pose.position, &dir, cfg.height).ok().map(|p| {
                                let (lat, lon, _) = ecef_to_geodetic(&p);
                                (lat.to_degrees(), lon.to_degrees())
                            }));
                        }
                    }
                    cached = Some((bt.misalignment, ll));
                }
                let ll = &cached.as_ref().expect("filled").1;
                // Bin radiance, convert to linear counts.
                let mut lin = vec![0.0; rows * cols];
                for l in 0..rows {
                    for m in 0..cols {
                        let mut acc = 0.0;
                        for r in l * br..(l + 1) * br {
                            for c in m * bc..(m + 1) * bc {
                                let v = ll[r * sensor.active_cols + c].and_then(|(lat, lon)| scene.sample(sidx, lat, lon));
                                match v {
                                    Some(v) => acc += v,
                                    None => outside += 1,
                                }
                            }
                        }
                        lin[l * cols + m] = (acc / (br * bc) as f64 - cfg.offset) / cfg.gain;
                    }
                }
                let mut fr = Frame { band, mode, seq: k, start_time: t, rows, cols, data: lin, tilt_angle: tilt };
                if let Some(s) = &smear {
                    fr = apply_smear(&fr, s)?;
                }
                let mut brng = stream_rng(cfg.seed, ((k as u64) << 8) | (bi as u64 + 1));
                let counts: Vec<u16> = fr
                    .data
                    .iter()
                    .enumerate()
                    .map(|(idx, &s)| {
                        let j = idx % cols;
                        let signal = nonlin.invert(s * bt.prnu_response[j]);
                        let mut v = signal + dark_actual[j];
                        if let Some(n) = &effects.noise {
                            let var = n.read * n.read + n.shot * signal.max(0.0);
                            v += var.sqrt() * brng.sample::<f64, _>(StandardNormal);
                        }
                        v.round().clamp(0.0, max) as u16
                    })
                    .collect();
                let dark_row = match &effects.dark {
                    Some(d) if k % cfg.dark_cadence(d) == 0 => {
                        let width = d.width.unwrap_or(cols).min(cols);
                        Some(
                            (0..width)
                                .map(|j| (dark_actual[j] + d.noise * brng.sample::<f64, _>(StandardNormal)).round().clamp(0.0, max) as u16)
                                .collect(),
                        )
                    }
                    _ => None,
                };
                frames.push(RawFrame { band, mode, seq: k, start_time: t, rows, cols, counts, dark_row, tilt_angle: tilt });
            }
            Ok((truth, frames, outside))
        })
        .collect();

    let per_frame = sensor.active_rows * sensor.active_cols * cfg.bands.len();
    let mut truths = Vec::new();
    let mut frames = Vec::new();
    let mut outside_total = 0;
    for r in rendered {
        let (t, f, outside) = r?;
        outside_total += outside;
        if outside == per_frame {
            log::warn!("frame {} lies entirely outside the scene; stack truncated", t.seq);
            break;
        }
        truths.push(t);
        frames.extend(f);
    }
    if truths.is_empty() {
        return Err(domain("the ground track never enters the scene"));
    }
    if outside_total > 0 {
        log::warn!("{outside_total} detector samples fell outside the scene");
    }
    let stack = FrameStack {
        mode,
        sensor: SensorGeometry { tilt_angle: cfg.tilt.start, ..sensor.clone() },
        orbit: cfg.orbit,
        attitude: telemetry,
        frame_period: period,
        integration_time: cfg.integration_time,
        height: cfg.height,
        frames,
    };
    let truth = TruthBundle {
        config: cfg.clone(),
        effects: effects.clone(),
        frame_period: period,
        frames: truths,
        bands: band_truth,
        dark_actual,
        dark_night,
        nonlin,
        outside_samples: outside_total,
    };
    Ok((stack, truth))
}
