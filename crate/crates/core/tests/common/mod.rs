#![allow(dead_code)]

use l1chain::geocal::Raster;
use l1chain::geom::{GroundPoint, LccGrid, LccProjection, Mode, SensorGeometry};
use l1chain::radiometry::FrameStack;
use l1chain::sim::{generate_scene, simulate_acquisition, AcquisitionConfig, EffectsConfig, Scene, TextureParams, TruthBundle};
use l1chain::tdi::{GridDef, Kernel, Level, ProductGrid, ProductMetadata};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Band-limited analytic texture, evaluable at fractional positions.
pub struct Texture(Vec<(f64, f64, f64, f64)>);

impl Texture {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Texture(
            (0..24)
                .map(|_| {
                    let w = rng.random_range(0.08..0.6);
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    (w * a.cos(), w * a.sin(), rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.5..1.5))
                })
                .collect(),
        )
    }

    pub fn at(&self, r: f64, c: f64) -> f64 {
        100.0 + self.0.iter().map(|&(wr, wc, ph, a)| a * (wr * r + wc * c + ph).sin()).sum::<f64>()
    }

    /// `target(x + shift) = reference(x)`.
    pub fn raster(&self, rows: usize, cols: usize, shift: (f64, f64)) -> Raster {
        Raster::from_fn(rows, cols, |i, j| self.at(i as f64 - shift.0, j as f64 - shift.1))
    }
}

pub fn metadata() -> ProductMetadata {
    ProductMetadata {
        mode: Mode::Lac,
        start_time: 0.0,
        end_time: 1.0,
        frames: 1,
        kernel: Kernel::Exponential,
        sigma: 0.5,
        calibration_version: "test".into(),
        sensor: SensorGeometry::default(),
        height: 0.0,
    }
}

pub fn l1c_grid(rows: usize, cols: usize) -> LccGrid {
    LccGrid { projection: LccProjection::centered(10.0, 70.0, 366.0), x0: 0.0, y0: 0.0, rows, cols }
}

/// A fully filled one-band product with values from `f(row, col)`.
pub fn product(level: Level, rows: usize, cols: usize, band: u8, f: impl Fn(usize, usize) -> f64) -> ProductGrid {
    let grid = match level {
        Level::L1c => GridDef::L1c(l1c_grid(rows, cols)),
        _ => GridDef::L1b { start_time: 0.0, line_period: 0.05, look_row: 23.0 },
    };
    let mut p = ProductGrid::empty(level, grid, rows, cols, &[band], metadata()).unwrap();
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            p.radiance[0][k] = f(i, j) as f32;
            p.quality[0][k] = 0;
            p.sample_count[0][k] = 20;
            let g = GroundPoint::new(10.0 + i as f64 * 1e-3, 70.0 + j as f64 * 1e-3, 0.0);
            p.lat[k] = g.lat;
            p.lon[k] = g.lon;
        }
    }
    p
}

/// A small simulated acquisition on a narrow detector.
pub fn small_acquisition(
    seed: u64,
    cols: usize,
    frames: usize,
    bands: &[u8],
    effects: &EffectsConfig,
    texture: &TextureParams,
) -> (Scene, FrameStack, TruthBundle) {
    let cfg = AcquisitionConfig {
        sensor: SensorGeometry::with_columns(cols, 10.0),
        num_frames: frames,
        bands: bands.to_vec(),
        seed,
        ..Default::default()
    };
    let extent = cfg.scene_extent(0.05).unwrap();
    let scene = generate_scene(seed, extent, bands, texture).unwrap();
    let (stack, truth) = simulate_acquisition(&scene, &cfg, effects).unwrap();
    (scene, stack, truth)
}
