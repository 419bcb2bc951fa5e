//! Count-to-radiance conversion.

use serde::{Deserialize, Serialize};

use super::frame::{Frame, RawFrame};
use crate::error::{domain, Error, Result};

/// Monotone piecewise-linear lookup; empty means identity. Extrapolates
/// linearly from the end segments.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NonlinLut {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn interp(xs: &[f64], ys: &[f64], v: f64) -> f64 {
    let n = xs.len();
    let k = xs.partition_point(|&x| x <= v).clamp(1, n - 1);
    let (x0, x1, y0, y1) = (xs[k - 1], xs[k], ys[k - 1], ys[k]);
    y0 + (v - x0) * (y1 - y0) / (x1 - x0)
}

impl NonlinLut {
    pub fn identity() -> Self {
        NonlinLut::default()
    }

    /// Tabulates `f` at `n` points over `[lo, hi]`.
    pub fn tabulate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let x: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let y = x.iter().map(|&v| f(v)).collect();
        let lut = NonlinLut { x, y };
        lut.validate()?;
        Ok(lut)
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_identity() {
            return Ok(());
        }
        if self.x.len() != self.y.len() || self.x.len() < 2 {
            return Err(domain("nonlinearity table needs ≥ 2 matched points"));
        }
        if self.x.windows(2).any(|w| !(w[1] > w[0])) || self.y.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("nonlinearity table must be strictly increasing"));
        }
        Ok(())
    }

    pub fn eval(&self, v: f64) -> f64 {
        if self.is_identity() {
            v
        } else {
            interp(&self.x, &self.y, v)
        }
    }

    pub fn invert(&self, v: f64) -> f64 {
        if self.is_identity() {
            v
        } else {
            interp(&self.y, &self.x, v)
        }
    }
}

/// Per-band calibration: `L = Nonlin(V − DS)·C[row] + D[row]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibCoeffs {
    pub band: u8,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub nonlin: NonlinLut,
}

impl CalibCoeffs {
    pub fn uniform(band: u8, rows: usize, c: f64, d: f64) -> Self {
        CalibCoeffs { band, c: vec![c; rows], d: vec![d; rows], nonlin: NonlinLut::identity() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.d.len() {
            return Err(domain("C and D tables differ in length"));
        }
        if self.c.iter().any(|&c| !(c > 0.0)) {
            return Err(domain("multiplicative coefficients must be positive"));
        }
        self.nonlin.validate()
    }

    pub fn check(&self, band: u8, rows: usize) -> Result<()> {
        if self.band != band {
            return Err(Error::CalibrationMissing(format!("no coefficients for band {band}")));
        }
        if self.c.len() != rows {
            return Err(domain("coefficient table rows differ from frame rows"));
        }
        self.validate()
    }
}

/// Applies `C`/`D` to a frame already linearized and flattened.
pub fn apply_gain_offset(frame: &mut Frame, coeffs: &CalibCoeffs) -> Result<()> {
    coeffs.check(frame.band, frame.rows)?;
    let cols = frame.cols;
    for (i, row) in frame.data.chunks_mut(cols).enumerate() {
        let (c, d) = (coeffs.c[i], coeffs.d[i]);
        row.iter_mut().for_each(|v| *v = *v * c + d);
    }
    Ok(())
}

/// Direct per-pixel evaluation of the calibration equation.
pub fn count_to_radiance(frame: &RawFrame, dark: &[f64], coeffs: Option<&CalibCoeffs>) -> Result<Frame> {
    let coeffs = coeffs.ok_or_else(|| Error::CalibrationMissing(format!("no coefficients for band {}", frame.band)))?;
    coeffs.check(frame.band, frame.rows)?;
    let mut out = super::dark::correct_dark(frame, dark)?;
    out.data.iter_mut().for_each(|v| *v = coeffs.nonlin.eval(*v));
    apply_gain_offset(&mut out, coeffs)?;
    Ok(out)
}
