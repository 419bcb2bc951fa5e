//! Camera interior geometry: detector layout, lens distortion, payload tilt
//! and mounting alignment, plus the per-column look corrections produced by
//! geometric calibration.

use serde::{Deserialize, Serialize};

use super::{rot_x, rot_y, rot_z, Mat3, Vec3};
use crate::error::{domain, Result};

/// Full field-of-view half angle at the array edge (deg).
pub const EDGE_FIELD_ANGLE_DEG: f64 = 43.5;

/// Acquisition mode of the frame camera.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lac,
    Gac,
}

impl Mode {
    /// Physical detector rows summed into one transmitted row.
    pub fn row_binning(self) -> usize {
        match self {
            Mode::Lac => 2,
            Mode::Gac => 6,
        }
    }

    /// Physical detector columns summed into one transmitted column.
    pub fn col_binning(self) -> usize {
        match self {
            Mode::Lac => 1,
            Mode::Gac => 2,
        }
    }

    pub fn frame_rows(self, sensor: &SensorGeometry) -> usize {
        sensor.active_rows / self.row_binning()
    }

    pub fn frame_cols(self, sensor: &SensorGeometry) -> usize {
        sensor.active_cols / self.col_binning()
    }

    /// Scan lines of the output buffer for a single raw frame
    /// (47 for LAC, 13 for GAC on the 48-row detector).
    pub fn base_scans(self, sensor: &SensorGeometry) -> usize {
        let rows = self.frame_rows(sensor);
        match self {
            Mode::Lac => 2 * rows - 1,
            Mode::Gac => 2 * rows - 3,
        }
    }

    pub fn bit_depth(self) -> u32 {
        match self {
            Mode::Lac => 12,
            Mode::Gac => 16,
        }
    }

    pub fn max_count(self) -> u32 {
        (1u32 << self.bit_depth()) - 1
    }

    /// Physical row coordinate of the centre of binned row `l`.
    pub fn physical_row(self, l: f64) -> f64 {
        let b = self.row_binning() as f64;
        l * b + (b - 1.0) / 2.0
    }

    pub fn physical_col(self, m: f64) -> f64 {
        let b = self.col_binning() as f64;
        m * b + (b - 1.0) / 2.0
    }

    pub fn binned_row(self, r: f64) -> f64 {
        let b = self.row_binning() as f64;
        (r - (b - 1.0) / 2.0) / b
    }

    pub fn binned_col(self, c: f64) -> f64 {
        let b = self.col_binning() as f64;
        (c - (b - 1.0) / 2.0) / b
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Lac => "LAC",
            Mode::Gac => "GAC",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lac" => Ok(Mode::Lac),
            "gac" => Ok(Mode::Gac),
            other => Err(domain(format!("unknown mode '{other}'"))),
        }
    }
}

/// Per-axis polynomial mapping ideal normalized focal-plane coordinates
/// (tangent of the field angle) to distorted ones. Coefficients are in
/// ascending order, degree ≤ 5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub across: [f64; 6],
    pub along: [f64; 6],
}

const IDENTITY_POLY: [f64; 6] = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];

fn poly_eval(c: &[f64; 6], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn poly_deriv(c: &[f64; 6], x: f64) -> f64 {
    (1..6).rev().fold(0.0, |acc, k| acc * x + k as f64 * c[k])
}

fn poly_invert(c: &[f64; 6], y: f64) -> f64 {
    if *c == IDENTITY_POLY {
        return y;
    }
    let mut x = y;
    for _ in 0..30 {
        let f = poly_eval(c, x) - y;
        let d = poly_deriv(c, x);
        if d.abs() < 1e-12 {
            break;
        }
        let step = f / d;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

impl Distortion {
    pub fn identity() -> Self {
        Distortion { across: IDENTITY_POLY, along: IDENTITY_POLY }
    }

    /// Cubic across-track term chosen so the normalized distorted coordinate
    /// `edge` (array half-width over focal length) sees the field angle
    /// `edge_angle_deg`. The along-track axis is left undistorted.
    pub fn edge_correcting(edge: f64, edge_angle_deg: f64) -> Self {
        let u = edge_angle_deg.to_radians().tan();
        let k = (edge / u - 1.0) / (u * u);
        let mut across = IDENTITY_POLY;
        across[3] = k;
        Distortion { across, along: IDENTITY_POLY }
    }

    pub fn is_identity(&self) -> bool {
        self.across == IDENTITY_POLY && self.along == IDENTITY_POLY
    }

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        (poly_eval(&self.across, u), poly_eval(&self.along, v))
    }

    pub fn invert(&self, ud: f64, vd: f64) -> (f64, f64) {
        (poly_invert(&self.across, ud), poly_invert(&self.along, vd))
    }
}

/// Static interior/mounting geometry of the frame camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorGeometry {
    /// Focal length (mm).
    pub focal_length: f64,
    /// Detector pixel pitch (µm).
    pub pixel_pitch: f64,
    pub active_cols: usize,
    pub active_rows: usize,
    /// Along-track payload tilt (deg), positive looks forward.
    pub tilt_angle: f64,
    /// Mounting angles about body x, y, z (rad).
    pub alignment: [f64; 3],
    pub distortion: Distortion,
}

impl Default for SensorGeometry {
    fn default() -> Self {
        SensorGeometry::with_columns(4000, 10.0)
    }
}

impl SensorGeometry {
    /// A 48-row detector with `cols` columns of the given pitch and the
    /// default 20 mm lens. The distortion is the edge-correcting default
    /// evaluated for the standard 4000 × 10 µm array, so narrower or coarser
    /// desk-scale arrays keep the same lens.
    pub fn with_columns(cols: usize, pixel_pitch_um: f64) -> Self {
        let focal = 20.0;
        let edge = 2000.0 * 10.0e-3 / focal;
        SensorGeometry {
            focal_length: focal,
            pixel_pitch: pixel_pitch_um,
            active_cols: cols,
            active_rows: 48,
            tilt_angle: 0.0,
            alignment: [0.0; 3],
            distortion: Distortion::edge_correcting(edge, EDGE_FIELD_ANGLE_DEG),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length > 0.0) {
            return Err(domain("focal length must be positive"));
        }
        if !(self.pixel_pitch > 0.0) {
            return Err(domain("pixel pitch must be positive"));
        }
        if self.active_cols == 0 || self.active_rows == 0 {
            return Err(domain("detector must have rows and columns"));
        }
        if !(self.tilt_angle.abs() <= 20.0) {
            return Err(domain(format!("tilt {} deg outside ±20", self.tilt_angle)));
        }
        if self.alignment.iter().any(|a| !a.is_finite()) {
            return Err(domain("alignment angles must be finite"));
        }
        Ok(())
    }

    /// Focal length expressed in pixels.
    pub fn focal_px(&self) -> f64 {
        self.focal_length * 1000.0 / self.pixel_pitch
    }

    /// Rotation from camera coordinates (across, row direction, boresight)
    /// to the body frame (x along-track forward, y across, z nadir). Tilt is
    /// applied about the across-track axis, then mounting alignment.
    pub fn camera_to_body(&self) -> Mat3 {
        #[rustfmt::skip]
        let axes = Mat3::new(
            0.0, -1.0, 0.0,
            1.0,  0.0, 0.0,
            0.0,  0.0, 1.0,
        );
        let align = rot_z(self.alignment[2]) * rot_y(self.alignment[1]) * rot_x(self.alignment[0]);
        align * rot_y(self.tilt_angle.to_radians()) * axes
    }

    fn check_index(&self, row: f64, col: f64) -> Result<()> {
        if !(row >= -0.5 && row < self.active_rows as f64) || !(col >= -0.5 && col < self.active_cols as f64) {
            return Err(domain(format!("pixel ({row}, {col}) outside the detector")));
        }
        Ok(())
    }

    /// Normalized ideal camera direction `(u, v, 1)` of a fractional pixel.
    pub fn ideal_camera_direction(&self, row: f64, col: f64) -> Vec3 {
        let fpx = self.focal_px();
        let ud = (col - (self.active_cols as f64 - 1.0) / 2.0) / fpx;
        let vd = (row - (self.active_rows as f64 - 1.0) / 2.0) / fpx;
        let (u, v) = self.distortion.invert(ud, vd);
        Vec3::new(u, v, 1.0)
    }

    /// Unit look vector of a fractional pixel in the body frame.
    pub fn look_vector(&self, row: f64, col: f64) -> Result<Vec3> {
        self.check_index(row, col)?;
        Ok((self.camera_to_body() * self.ideal_camera_direction(row, col)).normalize())
    }

    /// Across-track field angle (deg) of a column, ignoring tilt/alignment.
    pub fn across_track_angle(&self, col: f64) -> f64 {
        let d = self.ideal_camera_direction((self.active_rows as f64 - 1.0) / 2.0, col);
        d.x.atan2(d.z).to_degrees()
    }

    /// Normalized field coordinate of a physical column, -1 .. 1 edge to edge.
    pub fn field_coordinate(&self, col: f64) -> f64 {
        (col - (self.active_cols as f64 - 1.0) / 2.0) / (self.active_cols as f64 / 2.0)
    }
}

/// Field-dependent roll/pitch corrections, each a cubic in the normalized
/// field coordinate. Used for band misalignment, band-to-band registration
/// profiles and interior calibration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LookCorrection {
    /// Rotation about the along-track axis (rad), moves the look across-track.
    pub roll: [f64; 4],
    /// Rotation about the across-track axis (rad), moves the look along-track.
    pub pitch: [f64; 4],
}

fn cubic(c: &[f64; 4], x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

impl LookCorrection {
    pub fn constant(roll: f64, pitch: f64) -> Self {
        LookCorrection { roll: [roll, 0.0, 0.0, 0.0], pitch: [pitch, 0.0, 0.0, 0.0] }
    }

    pub fn is_zero(&self) -> bool {
        self.roll.iter().chain(self.pitch.iter()).all(|&c| c == 0.0)
    }

    pub fn angles(&self, xi: f64) -> (f64, f64) {
        (cubic(&self.roll, xi), cubic(&self.pitch, xi))
    }

    /// Small-angle composition: coefficients add.
    pub fn compose(&self, other: &LookCorrection) -> LookCorrection {
        let mut out = *self;
        for k in 0..4 {
            out.roll[k] += other.roll[k];
            out.pitch[k] += other.pitch[k];
        }
        out
    }

    pub fn negated(&self) -> LookCorrection {
        LookCorrection::default().compose(&LookCorrection {
            roll: self.roll.map(|c| -c),
            pitch: self.pitch.map(|c| -c),
        })
    }

    fn rotation(&self, xi: f64) -> Mat3 {
        let (roll, pitch) = self.angles(xi);
        rot_x(roll) * rot_y(pitch)
    }
}

/// A band's camera: shared sensor geometry plus the band's look correction.
#[derive(Debug, Clone)]
pub struct Camera {
    pub sensor: SensorGeometry,
    pub correction: LookCorrection,
    cam_to_body: Mat3,
}

impl Camera {
    pub fn new(sensor: SensorGeometry, correction: LookCorrection) -> Self {
        let cam_to_body = sensor.camera_to_body();
        Camera { sensor, correction, cam_to_body }
    }

    pub fn nominal(sensor: SensorGeometry) -> Self {
        Camera::new(sensor, LookCorrection::default())
    }

    /// Body-frame unit look vector; no range check, for internal hot paths.
    pub fn look_unchecked(&self, row: f64, col: f64) -> Vec3 {
        let d = (self.cam_to_body * self.sensor.ideal_camera_direction(row, col)).normalize();
        if self.correction.is_zero() {
            d
        } else {
            self.correction.rotation(self.sensor.field_coordinate(col)) * d
        }
    }

    pub fn look_vector(&self, row: f64, col: f64) -> Result<Vec3> {
        self.sensor.check_index(row, col)?;
        Ok(self.look_unchecked(row, col))
    }

    fn project_uncorrected(&self, dir_body: &Vec3) -> Option<(f64, f64)> {
        let c = self.cam_to_body.transpose() * dir_body;
        if c.z <= 1e-9 {
            return None;
        }
        let (ud, vd) = self.sensor.distortion.apply(c.x / c.z, c.y / c.z);
        let fpx = self.sensor.focal_px();
        Some((
            vd * fpx + (self.sensor.active_rows as f64 - 1.0) / 2.0,
            ud * fpx + (self.sensor.active_cols as f64 - 1.0) / 2.0,
        ))
    }

    /// Physical (row, col) at which a body-frame direction is imaged. The
    /// result may lie outside the detector; `None` when behind the camera.
    pub fn project(&self, dir_body: &Vec3) -> Option<(f64, f64)> {
        if self.correction.is_zero() {
            return self.project_uncorrected(dir_body);
        }
        // Field-dependent correction: fixed point on the column.
        let mut rc = self.project_uncorrected(dir_body)?;
        for _ in 0..8 {
            let xi = self.sensor.field_coordinate(rc.1);
            let undone = self.correction.rotation(xi).transpose() * dir_body;
            let next = self.project_uncorrected(&undone)?;
            let done = (next.1 - rc.1).abs() < 1e-9 && (next.0 - rc.0).abs() < 1e-9;
            rc = next;
            if done {
                break;
            }
        }
        Some(rc)
    }
}
