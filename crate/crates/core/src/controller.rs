//! Lloyd centroid-seeking update and the stopping rule.

use crate::error::{Error, Result};
use crate::geometry::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlParams {
    /// Proportional gain `k`, 1/s.
    pub gain: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Stopping distance to the centroid, m.
    pub epsilon: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            gain: 1.0,
            dt: 0.05,
            epsilon: 1e-3,
        }
    }
}

impl ControlParams {
    pub fn new(gain: f64, dt: f64, epsilon: f64) -> Result<Self> {
        let p = Self { gain, dt, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::config("control.gain", format!("must be positive, got {}", self.gain)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("control.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("control.epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if self.gain * self.dt > 1.0 {
            return Err(Error::config(
                "control",
                format!("gain·dt = {} overshoots the centroid; it must be at most 1", self.gain * self.dt),
            ));
        }
        Ok(())
    }
}

/// Explicit Euler step of `ṗ = k (C − p)`.
#[inline]
pub fn lloyd_step(position: Point, centroid: Point, params: &ControlParams) -> Point {
    position + (centroid - position) * (params.dt * params.gain)
}

/// Whether every robot is within `epsilon` of its centroid (inclusive).
pub fn converged(positions: &[Point], centroids: &[Point], epsilon: f64) -> Result<bool> {
    if positions.len() != centroids.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            actual: centroids.len(),
        });
    }
    Ok(positions.iter().zip(centroids).all(|(p, c)| p.distance(*c) <= epsilon))
}
