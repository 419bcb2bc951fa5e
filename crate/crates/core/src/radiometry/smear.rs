//! Frame-transfer smear at binned-row granularity.
//!
//! While charge is shifted into and out of the image section it keeps
//! integrating under every row it crosses. In the binned frame this mixes
//! each measured row with the ground features imaged by the rows it crossed:
//! on the way in the packet passes rows below it (features one row further
//! along, from the preceding frame's geometry, including two beyond the
//! array edge), on the way out it passes rows above it (features one row
//! earlier, from the subsequent frame). Features outside the frame are
//! replicated from the nearest edge row, giving a square matrix that the
//! ground segment can invert using the current frame alone.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frame::Frame;
use crate::error::{domain, Error, Result};
use crate::geom::{Mode, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmearParams {
    pub mode: Mode,
    /// Time to shift charge by one physical row (µs).
    pub row_transfer_time: f64,
    /// Physical rows the charge crosses, including those outside the
    /// active area.
    pub total_rows: usize,
    pub active_rows: usize,
    /// Integration time per frame (ms).
    pub integration_time: f64,
    /// Recorded for provenance; timing is carried by the integration time.
    pub oversampling: u32,
}

impl SmearParams {
    pub fn new(mode: Mode, integration_time_ms: f64) -> Self {
        SmearParams {
            mode,
            row_transfer_time: 2.0,
            total_rows: 54,
            active_rows: SensorGeometry::default().active_rows,
            integration_time: integration_time_ms,
            oversampling: 1,
        }
    }

    /// Per-row-crossing contamination fraction.
    pub fn epsilon(&self) -> f64 {
        self.row_transfer_time * 1e-6 / (self.integration_time * 1e-3)
    }
}

const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct SmearModel {
    pub params: SmearParams,
    /// Binned rows per frame.
    pub rows: usize,
    pub weights: DMatrix<f64>,
    pub condition: f64,
    inverse: DMatrix<f64>,
}

/// Builds the binned smear matrix `W` (measured = W · true, per column).
pub fn build_smear_weights(params: &SmearParams) -> Result<SmearModel> {
    let transfer_us = params.total_rows as f64 * params.row_transfer_time;
    if !(params.integration_time * 1e3 > transfer_us) {
        return Err(Error::InvalidTiming(format!(
            "integration {} ms does not exceed the {transfer_us} µs transfer",
            params.integration_time
        )));
    }
    let eps = params.epsilon();
    if !(eps < 1.0) {
        return Err(Error::InvalidTiming(format!("epsilon {eps} ≥ 1")));
    }
    if params.total_rows < params.active_rows {
        return Err(domain("total rows must include the active rows"));
    }
    let b = params.mode.row_binning();
    if params.active_rows % b != 0 {
        return Err(domain("active rows not divisible by the binning factor"));
    }
    let n = params.active_rows / b;
    let crossing = b as f64 * eps;
    let extra = (params.total_rows - params.active_rows) as f64 * eps / 2.0;
    // Extended features -1 ..= n+1 map to columns clamped into the frame.
    let clamp = |f: isize| f.clamp(0, n as isize - 1) as usize;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for j in i + 1..n {
            w[(i, clamp(j as isize + 1))] += crossing;
            off += crossing;
        }
        for f in [n as isize, n as isize + 1] {
            w[(i, clamp(f))] += extra;
            off += extra;
        }
        for j in 0..i {
            w[(i, clamp(j as isize - 1))] += crossing;
            off += crossing;
        }
        w[(i, i)] += 1.0 - off;
    }
    let sv = w.clone().svd(false, false).singular_values;
    let smin = sv.min();
    let condition = if smin > 0.0 { sv.max() / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Conditioning { condition });
    }
    let inverse = w.clone().try_inverse().ok_or(Error::Conditioning { condition })?;
    Ok(SmearModel { params: *params, rows: n, weights: w, condition, inverse })
}

fn mix(frame: &Frame, m: &DMatrix<f64>) -> Frame {
    let cols = frame.cols;
    let mut out = frame.clone();
    out.data.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..frame.rows {
        let dst = &mut out.data[i * cols..(i + 1) * cols];
        for k in 0..frame.rows {
            let w = m[(i, k)];
            if w == 0.0 {
                continue;
            }
            for (d, s) in dst.iter_mut().zip(frame.row(k)) {
                *d += w * s;
            }
        }
    }
    out
}

impl SmearModel {
    fn check(&self, frame: &Frame) -> Result<()> {
        if frame.mode != self.params.mode || frame.rows != self.rows {
            return Err(domain("smear model does not match the frame mode"));
        }
        Ok(())
    }
}

/// Forward smear (simulator side).
pub fn apply_smear(frame: &Frame, model: &SmearModel) -> Result<Frame> {
    model.check(frame)?;
    Ok(mix(frame, &model.weights))
}

/// Solves `W · s = m` for every column.
pub fn correct_smear(frame: &Frame, model: &SmearModel) -> Result<Frame> {
    model.check(frame)?;
    Ok(mix(frame, &model.inverse))
}
