//! Importance-density fields over the plane.

use crate::error::{Error, Result};
use crate::geometry::{FrameTransform, Point};
use serde::{Deserialize, Serialize};

/// A strictly positive importance weighting `φ(q, t)`.
pub trait Density: Sync {
    fn eval(&self, q: Point, t: f64) -> f64;

    /// `Some(φ)` when the field is the same everywhere and at all times,
    /// which lets integrators skip per-cell sampling.
    fn constant_value(&self) -> Option<f64> {
        None
    }
}

fn default_base() -> f64 {
    0.01
}

fn default_uniform() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityField {
    Uniform {
        #[serde(default = "default_uniform")]
        base: f64,
    },
    Gaussian {
        #[serde(default = "default_base")]
        base: f64,
        amplitude: f64,
        sigma: f64,
        center: Point,
    },
    /// A Gaussian bump whose centre moves as `start + velocity·t`.
    MovingGaussian {
        #[serde(default = "default_base")]
        base: f64,
        amplitude: f64,
        sigma: f64,
        start: Point,
        velocity: Point,
    },
}

impl Default for DensityField {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl DensityField {
    pub fn uniform(base: f64) -> Self {
        DensityField::Uniform { base }
    }

    pub fn gaussian(base: f64, amplitude: f64, sigma: f64, center: Point) -> Result<Self> {
        let f = DensityField::Gaussian {
            base,
            amplitude,
            sigma,
            center,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn moving_gaussian(base: f64, amplitude: f64, sigma: f64, start: Point, velocity: Point) -> Result<Self> {
        let f = DensityField::MovingGaussian {
            base,
            amplitude,
            sigma,
            start,
            velocity,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let base = self.base();
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::config("density.base", format!("must be a positive number, got {base}")));
        }
        match *self {
            DensityField::Uniform { .. } => Ok(()),
            DensityField::Gaussian {
                amplitude, sigma, center, ..
            } => check_bump(amplitude, sigma, &[("density.center", center)]),
            DensityField::MovingGaussian {
                amplitude,
                sigma,
                start,
                velocity,
                ..
            } => check_bump(
                amplitude,
                sigma,
                &[("density.start", start), ("density.velocity", velocity)],
            ),
        }
    }

    pub fn base(&self) -> f64 {
        match *self {
            DensityField::Uniform { base }
            | DensityField::Gaussian { base, .. }
            | DensityField::MovingGaussian { base, .. } => base,
        }
    }

    /// Peak location at time `t`; `None` for the uniform field.
    pub fn center(&self, t: f64) -> Option<Point> {
        match *self {
            DensityField::Uniform { .. } => None,
            DensityField::Gaussian { center, .. } => Some(center),
            DensityField::MovingGaussian { start, velocity, .. } => Some(start + velocity * t),
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            DensityField::Uniform { .. } => None,
            DensityField::Gaussian { sigma, .. } | DensityField::MovingGaussian { sigma, .. } => Some(sigma),
        }
    }

    pub fn is_time_varying(&self) -> bool {
        matches!(self, DensityField::MovingGaussian { velocity, .. } if velocity.norm() > 0.0)
    }

    /// The same field with time frozen at `t`.
    pub fn frozen_at(&self, t: f64) -> Self {
        match *self {
            DensityField::MovingGaussian {
                base, amplitude, sigma, ..
            } => DensityField::Gaussian {
                base,
                amplitude,
                sigma,
                center: self.center(t).unwrap_or_default(),
            },
            other => other,
        }
    }

    /// The field with its peak moved by `by`.
    pub fn translated(&self, by: Point) -> Self {
        let mut f = *self;
        match &mut f {
            DensityField::Uniform { .. } => {}
            DensityField::Gaussian { center, .. } => *center = *center + by,
            DensityField::MovingGaussian { start, .. } => *start = *start + by,
        }
        f
    }
}

fn check_bump(amplitude: f64, sigma: f64, points: &[(&str, Point)]) -> Result<()> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::config("density.amplitude", format!("must be non-negative, got {amplitude}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::config("density.sigma", format!("must be positive, got {sigma}")));
    }
    for (name, p) in points {
        if !p.is_finite() {
            return Err(Error::config(*name, "must be finite"));
        }
    }
    Ok(())
}

impl Density for DensityField {
    fn eval(&self, q: Point, t: f64) -> f64 {
        match *self {
            DensityField::Uniform { base } => base,
            DensityField::Gaussian {
                base,
                amplitude,
                sigma,
                center,
            } => base + amplitude * (-(q - center).norm_sq() / (2.0 * sigma * sigma)).exp(),
            DensityField::MovingGaussian {
                base,
                amplitude,
                sigma,
                start,
                velocity,
            } => {
                let c = start + velocity * t;
                base + amplitude * (-(q - c).norm_sq() / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match *self {
            DensityField::Uniform { base } => Some(base),
            DensityField::Gaussian { base, amplitude, .. } | DensityField::MovingGaussian { base, amplitude, .. }
                if amplitude == 0.0 =>
            {
                Some(base)
            }
            _ => None,
        }
    }
}

/// A density seen from a robot's local frame: `φ_local(q) = φ(T(q))`, where
/// `T` maps local coordinates to the frame the density is defined in.
#[derive(Debug, Clone, Copy)]
pub struct InFrame<'a, D: ?Sized> {
    pub density: &'a D,
    pub to_global: FrameTransform,
}

impl<'a, D: Density + ?Sized> InFrame<'a, D> {
    pub fn new(density: &'a D, to_global: FrameTransform) -> Self {
        Self { density, to_global }
    }
}

impl<D: Density + ?Sized> Density for InFrame<'_, D> {
    fn eval(&self, q: Point, t: f64) -> f64 {
        self.density.eval(self.to_global.apply(q), t)
    }

    fn constant_value(&self) -> Option<f64> {
        self.density.constant_value()
    }
}
