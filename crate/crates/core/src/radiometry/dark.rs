//! Dark-signal modelling from shielded-row samples.

use serde::{Deserialize, Serialize};

use super::frame::{Frame, RawFrame};
use crate::error::{domain, Error, Result};

/// Night-time column profile for one band, with readout-port boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarkReference {
    pub band: u8,
    /// Column-wise mean dark counts, one per shielded-row column.
    pub profile: Vec<f64>,
    /// Half-open column ranges `[start, end)` partitioning the profile.
    pub ports: Vec<[usize; 2]>,
}

impl DarkReference {
    /// Splits the profile into `num_ports` near-equal contiguous ports.
    pub fn new(band: u8, profile: Vec<f64>, num_ports: usize) -> Result<Self> {
        let n = profile.len();
        if num_ports == 0 || num_ports > n {
            return Err(domain("port count must be between 1 and the profile length"));
        }
        let ports = (0..num_ports).map(|p| [p * n / num_ports, (p + 1) * n / num_ports]).collect();
        Ok(DarkReference { band, profile, ports })
    }

    pub fn validate(&self) -> Result<()> {
        let mut next = 0;
        for p in &self.ports {
            if p[0] != next || p[1] <= p[0] {
                return Err(domain("dark ports must partition the profile"));
            }
            next = p[1];
        }
        if next != self.profile.len() {
            return Err(domain("dark ports must cover the whole profile"));
        }
        Ok(())
    }

    /// Mean of a set of night-time shielded rows.
    pub fn from_night_rows(band: u8, rows: &[Vec<u16>], num_ports: usize) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::InsufficientData("no night dark rows".into()))?;
        let mut profile = vec![0.0; first.len()];
        for r in rows {
            if r.len() != profile.len() {
                return Err(domain("night dark rows differ in length"));
            }
            for (p, &v) in profile.iter_mut().zip(r) {
                *p += v as f64;
            }
        }
        profile.iter_mut().for_each(|p| *p /= rows.len() as f64);
        DarkReference::new(band, profile, num_ports)
    }
}

/// A shielded-row sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkRow {
    pub time: f64,
    pub counts: Vec<f64>,
}

impl DarkRow {
    pub fn from_frames(frames: &[&RawFrame]) -> Vec<DarkRow> {
        frames
            .iter()
            .filter_map(|f| {
                f.dark_row.as_ref().map(|d| DarkRow { time: f.start_time, counts: d.iter().map(|&c| c as f64).collect() })
            })
            .collect()
    }
}

/// Dark estimate for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkEstimate {
    pub values: Vec<f64>,
    /// No shielded row fell inside the window; the nearest one was used.
    pub fallback: bool,
    /// Frame columns beyond the shielded-row width (value extended).
    pub uncovered: usize,
    pub port_scales: Vec<f64>,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Scales the reference profile per port by the median column ratio of the
/// shielded rows within `window` seconds of `time` (averaged) to the
/// reference. `cols` is the frame width.
pub fn model_dark(rows: &[DarkRow], reference: &DarkReference, time: f64, window: f64, cols: usize) -> Result<DarkEstimate> {
    reference.validate()?;
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!("no shielded rows for band {}", reference.band)));
    }
    let width = reference.profile.len();
    if rows.iter().any(|r| r.counts.len() != width) {
        return Err(domain("shielded row width differs from the dark reference"));
    }
    let near: Vec<&DarkRow> = rows.iter().filter(|r| (r.time - time).abs() <= window).collect();
    let fallback = near.is_empty();
    let chosen: Vec<&DarkRow> = if fallback {
        let best = rows
            .iter()
            .min_by(|a, b| (a.time - time).abs().total_cmp(&(b.time - time).abs()))
            .expect("non-empty");
        log::warn!("no shielded row within {window} s of t={time}; using t={}", best.time);
        vec![best]
    } else {
        near
    };
    let mut current = vec![0.0; width];
    for r in &chosen {
        for (c, v) in current.iter_mut().zip(&r.counts) {
            *c += v;
        }
    }
    current.iter_mut().for_each(|c| *c /= chosen.len() as f64);

    let mut values = vec![0.0; cols];
    let mut port_scales = Vec::with_capacity(reference.ports.len());
    for &[a, b] in &reference.ports {
        let ref_med = median(&mut reference.profile[a..b].to_vec());
        if ref_med == 0.0 || !ref_med.is_finite() {
            return Err(Error::DegenerateReference(format!("zero median over columns {a}..{b}")));
        }
        // Median of column ratios: the profile's own spread cancels, so the
        // factor is limited by shielded-row noise averaged over the port.
        let mut ratios: Vec<f64> = (a..b).filter(|&j| reference.profile[j] != 0.0).map(|j| current[j] / reference.profile[j]).collect();
        let scale = median(&mut ratios);
        port_scales.push(scale);
        for j in a..b.min(cols) {
            values[j] = reference.profile[j] * scale;
        }
    }
    let uncovered = cols.saturating_sub(width);
    if uncovered > 0 {
        let last = values[width - 1];
        values[width..].iter_mut().for_each(|v| *v = last);
    }
    Ok(DarkEstimate { values, fallback, uncovered, port_scales })
}

/// Subtracts a per-column dark estimate from every row; no clamping.
pub fn correct_dark(frame: &RawFrame, dark: &[f64]) -> Result<Frame> {
    if dark.len() != frame.cols {
        return Err(domain(format!("dark length {} differs from frame width {}", dark.len(), frame.cols)));
    }
    let mut out = Frame::from_raw(frame);
    for row in out.data.chunks_mut(frame.cols) {
        for (v, d) in row.iter_mut().zip(dark) {
            *v -= d;
        }
    }
    Ok(out)
}
