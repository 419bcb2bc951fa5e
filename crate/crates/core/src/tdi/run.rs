//! Ground TDI: output buffer, per-pixel sample gathering and binning.

use rayon::prelude::*;

use super::config::{Distance, Kernel, Level, TdiConfig};
use super::geometry::{CorrectedStack, GeometricCalibration};
use super::kernels::{bin_exponential, bin_nearest, NeighborSample};
use super::product::{GridDef, ProductGrid, ProductMetadata, QA_GEOMETRY, QA_UNFILLED};
use crate::error::{domain, Result};
use crate::geom::{build_virtual_linear_model, Camera, GroundPoint, LccGrid, LccProjection, Mode, Pose, Vec3, VirtualLinearModel};
use crate::radiometry::Frame;

/// The output grid of a run.
#[derive(Debug, Clone)]
pub enum OutputGrid {
    L1b { model: VirtualLinearModel, ground: Vec<Option<Vec3>> },
    L1c { grid: LccGrid, ground: Vec<Option<Vec3>> },
}

impl OutputGrid {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            OutputGrid::L1b { model, .. } => (model.num_scans, model.num_pixels),
            OutputGrid::L1c { grid, .. } => (grid.rows, grid.cols),
        }
    }

    pub fn ground(&self) -> &[Option<Vec3>] {
        match self {
            OutputGrid::L1b { ground, .. } | OutputGrid::L1c { ground, .. } => ground,
        }
    }

    fn def(&self) -> GridDef {
        match self {
            OutputGrid::L1b { model, .. } => {
                GridDef::L1b { start_time: model.start_time, line_period: model.line_period, look_row: model.look_row }
            }
            OutputGrid::L1c { grid, .. } => GridDef::L1c(*grid),
        }
    }

    fn level(&self) -> Level {
        match self {
            OutputGrid::L1b { .. } => Level::L1b,
            OutputGrid::L1c { .. } => Level::L1c,
        }
    }
}

/// Nominal across-track sampling at nadir (m) of one output column.
pub fn nominal_gsd(stack: &CorrectedStack) -> f64 {
    let s = &stack.sensor;
    s.pixel_pitch * 1e-6 / (s.focal_length * 1e-3) * stack.orbit.altitude * stack.mode.col_binning() as f64
}

/// Virtual linear model of a stack and the ground of every L1B pixel.
pub fn l1b_grid(stack: &CorrectedStack, geo: &GeometricCalibration) -> Result<OutputGrid> {
    let first = stack.bands.first().ok_or_else(|| domain("no bands"))?;
    let times: Vec<f64> = first.frames.iter().map(|f| f.start_time).collect();
    let tilt = first.frames.first().map(|f| f.tilt_angle).unwrap_or(stack.sensor.tilt_angle);
    let camera = geo.camera(&stack.sensor, None, tilt);
    let model = build_virtual_linear_model(&times, stack.frame_period, stack.mode, &camera)?;
    let ground: Vec<Option<Vec3>> = (0..model.num_scans)
        .into_par_iter()
        .flat_map_iter(|s| {
            let pose = stack.pose_at(model.scan_time(s as f64));
            let model = &model;
            (0..model.num_pixels).map(move |m| model.ground_ecef(&pose, m, stack.height).ok())
        })
        .collect();
    Ok(OutputGrid::L1b { model, ground })
}

/// LCC grid covering the L1B footprint, or the configured fixed grid.
pub fn l1c_grid(stack: &CorrectedStack, geo: &GeometricCalibration, cfg: &TdiConfig) -> Result<OutputGrid> {
    let grid = match cfg.grid {
        Some(g) => g,
        None => {
            let OutputGrid::L1b { model, ground } = l1b_grid(stack, geo)? else { unreachable!() };
            let (rows, cols) = (model.num_scans, model.num_pixels);
            let mut edge = Vec::new();
            for i in 0..rows {
                for j in [0, cols / 2, cols - 1] {
                    edge.push(ground[i * cols + j]);
                }
            }
            for j in 0..cols {
                edge.push(ground[j]);
                edge.push(ground[(rows - 1) * cols + j]);
            }
            let pts: Vec<GroundPoint> = edge.into_iter().flatten().map(|p| GroundPoint::from_ecef(&p)).collect();
            let centre = ground[(rows / 2) * cols + cols / 2]
                .map(|p| GroundPoint::from_ecef(&p))
                .ok_or_else(|| domain("footprint centre does not reach the ground"))?;
            let size = cfg.pixel_size.unwrap_or_else(|| nominal_gsd(stack));
            LccGrid::covering(LccProjection::centered(centre.lat, centre.lon, size), &pts, 0)?
        }
    };
    let ground: Vec<Option<Vec3>> = (0..grid.rows)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..grid.cols).map(move |j| {
                grid.ground(i as f64, j as f64).ok().map(|g| GroundPoint::new(g.lat, g.lon, stack.height).to_ecef())
            })
        })
        .collect();
    Ok(OutputGrid::L1c { grid, ground })
}

/// An empty product over the given grid.
pub fn allocate_output(grid: &OutputGrid, bands: &[u8], metadata: ProductMetadata) -> Result<ProductGrid> {
    let (rows, cols) = grid.dims();
    let mut p = ProductGrid::empty(grid.level(), grid.def(), rows, cols, bands, metadata)?;
    for (idx, g) in grid.ground().iter().enumerate() {
        if let Some(g) = g {
            let gp = GroundPoint::from_ecef(g);
            p.lat[idx] = gp.lat;
            p.lon[idx] = gp.lon;
        }
    }
    Ok(p)
}

/// Per-frame geometry of one band.
pub struct FrameGeometry {
    pub pose: Pose,
    pub camera: Camera,
}

/// Gathers samples of a band's frames for output pixels.
pub struct Sampler<'a> {
    pub rows: usize,
    pub cols: usize,
    pub ground: &'a [Option<Vec3>],
    pub frames: &'a [Frame],
    pub geometry: Vec<FrameGeometry>,
    pub mode: Mode,
    pub cfg: &'a TdiConfig,
}

impl<'a> Sampler<'a> {
    pub fn new(
        stack: &CorrectedStack,
        band: u8,
        frames: &'a [Frame],
        grid: &'a OutputGrid,
        geo: &GeometricCalibration,
        cfg: &'a TdiConfig,
    ) -> Self {
        let geometry = frames
            .iter()
            .map(|f| FrameGeometry { pose: stack.pose_at(f.start_time), camera: geo.camera(&stack.sensor, Some(band), f.tilt_angle) })
            .collect();
        let (rows, cols) = grid.dims();
        Sampler { rows, cols, ground: grid.ground(), frames, geometry, mode: stack.mode, cfg }
    }

    /// Fractional binned (row, col) of an Earth-fixed point in frame `k`.
    pub fn project(&self, k: usize, p: &Vec3) -> Option<(f64, f64)> {
        let g = &self.geometry[k];
        g.pose.project(&g.camera, p).map(|(r, c)| (self.mode.binned_row(r), self.mode.binned_col(c)))
    }

    fn neighbour(&self, i: usize, j: usize, di: bool) -> Option<(Vec3, f64)> {
        let at = |i: usize, j: usize| self.ground[i * self.cols + j];
        if di {
            if i + 1 < self.rows {
                at(i + 1, j).map(|g| (g, 1.0))
            } else if i > 0 {
                at(i - 1, j).map(|g| (g, -1.0))
            } else {
                None
            }
        } else if j + 1 < self.cols {
            at(i, j + 1).map(|g| (g, 1.0))
        } else if j > 0 {
            at(i, j - 1).map(|g| (g, -1.0))
        } else {
            None
        }
    }

    /// Samples around the ground location of output pixel `(i, j)` and the
    /// number of frames that contributed.
    pub fn gather(&self, i: usize, j: usize) -> (Vec<NeighborSample>, usize) {
        let mut out = Vec::new();
        let Some(g) = self.ground[i * self.cols + j] else { return (out, 0) };
        let nf = self.frames.len();
        if nf == 0 {
            return (out, 0);
        }
        let (n, m) = (self.frames[0].rows, self.frames[0].cols);
        let (nmax, mmax) = ((n - 1) as f64, (m - 1) as f64);
        // The ground point moves toward higher rows in later frames.
        let first = {
            let (mut lo, mut hi) = (0usize, nf);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let before = self.project(mid, &g).map(|(l, _)| l < 0.0).unwrap_or(true);
                if before {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let along = self.neighbour(i, j, true);
        let across = self.neighbour(i, j, false);
        let mut contributing = 0;
        for k in first..nf {
            let Some((l, mm)) = self.project(k, &g) else { continue };
            if l > nmax {
                break;
            }
            if !(l >= 0.0 && mm >= 0.0 && mm <= mmax) {
                continue;
            }
            contributing += 1;
            // Frame offsets → output-pixel offsets through the local Jacobian.
            let jac = match (along.and_then(|(p, s)| self.project(k, &p).map(|q| (q, s))), across.and_then(|(p, s)| self.project(k, &p).map(|q| (q, s)))) {
                (Some(((la, ma), sa)), Some(((lc, mc), sc))) => {
                    let b = nalgebra::Matrix2::new((la - l) * sa, (lc - l) * sc, (ma - mm) * sa, (mc - mm) * sc);
                    b.try_inverse()
                }
                _ => None,
            }
            .unwrap_or_else(nalgebra::Matrix2::identity);
            let frame = &self.frames[k];
            let (cl, cm) = (l.round() as isize, mm.round() as isize);
            let (wy, wx) = (self.cfg.wy as isize, self.cfg.wx as isize);
            for li in (cl - wy).max(0)..=(cl + wy).min(n as isize - 1) {
                for mi in (cm - wx).max(0)..=(cm + wx).min(m as isize - 1) {
                    let o = jac * nalgebra::Vector2::new(li as f64 - l, mi as f64 - mm);
                    let d2 = o.norm_squared();
                    let distance = match self.cfg.distance {
                        Distance::Squared => d2,
                        Distance::Linear => d2.sqrt(),
                    };
                    out.push(NeighborSample {
                        frame: k,
                        l: li as usize,
                        m: mi as usize,
                        distance,
                        value: frame.at(li as usize, mi as usize),
                    });
                }
            }
        }
        (out, contributing)
    }
}

/// Ground TDI of every band onto an L1B or L1C grid.
pub fn run_tdi(stack: &CorrectedStack, geo: &GeometricCalibration, cfg: &TdiConfig) -> Result<ProductGrid> {
    cfg.validate()?;
    if stack.bands.is_empty() || stack.bands.iter().any(|b| b.frames.is_empty()) {
        return Err(domain("no frames to integrate"));
    }
    let grid = match cfg.level {
        Level::L1b => l1b_grid(stack, geo)?,
        Level::L1c => l1c_grid(stack, geo, cfg)?,
        Level::L2 => unreachable!("rejected by validate"),
    };
    run_tdi_on(stack, geo, cfg, &grid)
}

/// Ground TDI onto a precomputed grid.
pub fn run_tdi_on(stack: &CorrectedStack, geo: &GeometricCalibration, cfg: &TdiConfig, grid: &OutputGrid) -> Result<ProductGrid> {
    let frames0 = &stack.bands[0].frames;
    let metadata = ProductMetadata {
        mode: stack.mode,
        start_time: frames0.first().map(|f| f.start_time).unwrap_or(0.0),
        end_time: frames0.last().map(|f| f.start_time).unwrap_or(0.0),
        frames: frames0.len(),
        kernel: cfg.kernel,
        sigma: cfg.sigma,
        calibration_version: stack.calibration_version.clone(),
        sensor: stack.sensor.clone(),
        height: stack.height,
    };
    let bands: Vec<u8> = stack.bands.iter().map(|b| b.band).collect();
    let mut product = allocate_output(grid, &bands, metadata)?;
    let (rows, cols) = grid.dims();
    for (bi, bf) in stack.bands.iter().enumerate() {
        let sampler = Sampler::new(stack, bf.band, &bf.frames, grid, geo, cfg);
        let results: Vec<Vec<(f32, u16, u8)>> = (0..rows)
            .into_par_iter()
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        if grid.ground()[i * cols + j].is_none() {
                            return (super::product::FILL_VALUE, 0, QA_UNFILLED | QA_GEOMETRY);
                        }
                        let (samples, count) = sampler.gather(i, j);
                        let value = match cfg.kernel {
                            Kernel::Exponential => bin_exponential(&samples, cfg.sigma, cfg.normalize).map(|(v, _)| v),
                            Kernel::Nearest => bin_nearest(&samples),
                        };
                        match value {
                            Some(v) => (v as f32, count as u16, 0),
                            None => (super::product::FILL_VALUE, count as u16, QA_UNFILLED),
                        }
                    })
                    .collect()
            })
            .collect();
        for (i, row) in results.into_iter().enumerate() {
            for (j, (v, c, q)) in row.into_iter().enumerate() {
                let idx = i * cols + j;
                product.radiance[bi][idx] = v;
                product.sample_count[bi][idx] = c;
                product.quality[bi][idx] = q;
            }
        }
    }
    Ok(product)
}
