//! Attitude angles relative to the local orbital frame.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Attitude at an epoch, with a linear drift applied equally to each axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttitudeState {
    pub epoch: f64,
    /// Rotation about the along-track axis (rad).
    pub roll: f64,
    /// Rotation about the across-track axis (rad).
    pub pitch: f64,
    /// Rotation about the nadir axis (rad).
    pub yaw: f64,
    /// deg/s.
    pub drift_rate: f64,
    /// deg, amplitude used by the simulator's jitter model.
    pub jitter_amplitude: f64,
}

impl AttitudeState {
    pub fn new(epoch: f64, roll: f64, pitch: f64, yaw: f64) -> Self {
        AttitudeState { epoch, roll, pitch, yaw, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.roll, self.pitch, self.yaw, self.drift_rate, self.jitter_amplitude];
        if all.iter().any(|a| !a.is_finite()) {
            return Err(domain("attitude angles must be finite"));
        }
        Ok(())
    }

    /// (roll, pitch, yaw) at time `t` including drift.
    pub fn angles_at(&self, t: f64) -> [f64; 3] {
        let d = (self.drift_rate * (t - self.epoch)).to_radians();
        [self.roll + d, self.pitch + d, self.yaw + d]
    }
}

/// Time-ordered attitude samples, linearly interpolated per angle and held
/// constant beyond either end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttitudeProfile {
    pub samples: Vec<AttitudeState>,
}

impl AttitudeProfile {
    pub fn constant(state: AttitudeState) -> Self {
        AttitudeProfile { samples: vec![state] }
    }

    pub fn nadir() -> Self {
        AttitudeProfile::constant(AttitudeState::default())
    }

    pub fn new(samples: Vec<AttitudeState>) -> Result<Self> {
        if samples.is_empty() {
            return Err(domain("attitude profile needs at least one sample"));
        }
        if samples.windows(2).any(|w| !(w[1].epoch > w[0].epoch)) {
            return Err(domain("attitude samples must be strictly increasing in time"));
        }
        for s in &samples {
            s.validate()?;
        }
        Ok(AttitudeProfile { samples })
    }

    pub fn angles_at(&self, t: f64) -> [f64; 3] {
        let s = &self.samples;
        if s.len() == 1 {
            return s[0].angles_at(t);
        }
        if t <= s[0].epoch {
            return s[0].angles_at(s[0].epoch);
        }
        let last = s.len() - 1;
        if t >= s[last].epoch {
            return s[last].angles_at(s[last].epoch);
        }
        let k = s.partition_point(|a| a.epoch <= t) - 1;
        let (a, b) = (&s[k], &s[k + 1]);
        let w = (t - a.epoch) / (b.epoch - a.epoch);
        let (pa, pb) = (a.angles_at(a.epoch), b.angles_at(b.epoch));
        [0, 1, 2].map(|i| pa[i] + w * (pb[i] - pa[i]))
    }

    /// Adds constant offsets to every sample.
    pub fn offset(&self, roll: f64, pitch: f64, yaw: f64) -> Self {
        AttitudeProfile {
            samples: self
                .samples
                .iter()
                .map(|s| AttitudeState { roll: s.roll + roll, pitch: s.pitch + pitch, yaw: s.yaw + yaw, ..*s })
                .collect(),
        }
    }
}
