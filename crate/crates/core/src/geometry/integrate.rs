//! Midpoint-rule integration of density moments over convex polygons.
//!
//! The grid is a lattice of `du × dv` cells in a rotated `(u, v)` system with
//! its own origin. A polygon is swept one grid row at a time: the row is
//! represented by the chord through its centre line, and along that chord the
//! density is held constant on each grid cell (sampled at the cell centre)
//! while the polynomial part of the integrand is integrated exactly. With the
//! grid fixed to the workspace, this is one fixed discrete measure shared by
//! every cell of a partition.

use super::{ConvexPolygon, Point};
use crate::density::Density;
use crate::error::{Error, Result};

/// Mass and first moment of a region, in the caller's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mass: f64,
    /// `∫ q φ(q) dq`, relative to the grid origin.
    first: Point,
    origin: Point,
    cos: f64,
    sin: f64,
}

impl Moments {
    /// Density-weighted centroid, `None` when the mass vanishes.
    pub fn centroid(&self) -> Option<Point> {
        if !(self.mass > 0.0) {
            return None;
        }
        let g = self.first * (1.0 / self.mass);
        Some(self.origin + Point::new(self.cos * g.x - self.sin * g.y, self.sin * g.x + self.cos * g.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationGrid {
    origin: Point,
    angle: f64,
    cos: f64,
    sin: f64,
    du: f64,
    dv: f64,
}

impl IntegrationGrid {
    pub fn new(origin: Point, angle: f64, du: f64, dv: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self {
            origin,
            angle,
            cos,
            sin,
            du,
            dv,
        }
    }

    /// Axis-aligned grid with `resolution` cells along each side of the
    /// polygon's bounding box.
    pub fn over_bounding_box(poly: &ConvexPolygon, resolution: usize) -> Option<Self> {
        let (lo, hi) = poly.bounding_box()?;
        let n = resolution as f64;
        Some(Self::new(lo, 0.0, (hi.x - lo.x) / n, (hi.y - lo.y) / n))
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.du, self.dv)
    }

    #[inline]
    fn grid_coords(&self, q: Point) -> Point {
        let d = q - self.origin;
        Point::new(self.cos * d.x + self.sin * d.y, -self.sin * d.x + self.cos * d.y)
    }

    #[inline]
    fn world_coords(&self, g: Point) -> Point {
        self.origin + Point::new(self.cos * g.x - self.sin * g.y, self.sin * g.x + self.cos * g.y)
    }

    /// Calls `f(u0, u1, v, phi)` for every constant-density chord piece of
    /// `poly`, in grid coordinates.
    fn sweep<D, F>(&self, poly: &ConvexPolygon, density: &D, t: f64, mut f: F)
    where
        D: Density + ?Sized,
        F: FnMut(f64, f64, f64, f64),
    {
        if poly.is_empty() || !(self.du > 0.0 && self.dv > 0.0) {
            return;
        }
        let g: Vec<Point> = poly.vertices().iter().map(|p| self.grid_coords(*p)).collect();
        let (vmin, vmax) = g
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
        let constant = density.constant_value();
        let first_row = (vmin / self.dv).floor() as i64;
        let last_row = (vmax / self.dv).floor() as i64;
        for row in first_row..=last_row {
            let v = (row as f64 + 0.5) * self.dv;
            if v < vmin || v > vmax {
                continue;
            }
            let Some((u0, u1)) = chord(&g, v) else { continue };
            if u1 <= u0 {
                continue;
            }
            match constant {
                Some(phi) => f(u0, u1, v, phi),
                None => {
                    let mut col = (u0 / self.du).floor() as i64;
                    loop {
                        let left = (col as f64 * self.du).max(u0);
                        let right = ((col + 1) as f64 * self.du).min(u1);
                        if right > left {
                            let centre = Point::new((col as f64 + 0.5) * self.du, v);
                            f(left, right, v, density.eval(self.world_coords(centre), t));
                        }
                        if right >= u1 {
                            break;
                        }
                        col += 1;
                    }
                }
            }
        }
    }

    pub fn moments<D: Density + ?Sized>(&self, poly: &ConvexPolygon, density: &D, t: f64) -> Moments {
        let (mut mass, mut mu, mut mv) = (0.0, 0.0, 0.0);
        let h = self.dv;
        self.sweep(poly, density, t, |u0, u1, v, phi| {
            let w = phi * h;
            mass += w * (u1 - u0);
            mu += w * 0.5 * (u1 * u1 - u0 * u0);
            mv += w * (u1 - u0) * v;
        });
        Moments {
            mass,
            first: Point::new(mu, mv),
            origin: self.origin,
            cos: self.cos,
            sin: self.sin,
        }
    }

    /// `∫_poly ½‖q − p‖² φ(q, t) dq`.
    pub fn cost_about<D: Density + ?Sized>(&self, poly: &ConvexPolygon, p: Point, density: &D, t: f64) -> f64 {
        let pg = self.grid_coords(p);
        let h = self.dv;
        let mut total = 0.0;
        self.sweep(poly, density, t, |u0, u1, v, phi| {
            let (a, b) = (u0 - pg.x, u1 - pg.x);
            let dv = v - pg.y;
            total += phi * h * ((b * b * b - a * a * a) / 3.0 + dv * dv * (u1 - u0));
        });
        0.5 * total
    }
}

/// Horizontal extent of a convex polygon (grid coordinates) along the line
/// `v = const`.
fn chord(g: &[Point], v: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = g.len();
    for k in 0..n {
        let (a, b) = (g[k], g[(k + 1) % n]);
        if (a.y - v) * (b.y - v) > 0.0 {
            continue;
        }
        if a.y == b.y {
            lo = lo.min(a.x.min(b.x));
            hi = hi.max(a.x.max(b.x));
        } else {
            let u = a.x + (v - a.y) / (b.y - a.y) * (b.x - a.x);
            lo = lo.min(u);
            hi = hi.max(u);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Density-weighted centroid and mass of `poly`, integrated on a grid of
/// `resolution × resolution` cells spanning its bounding box.
pub fn weighted_centroid_mass<D: Density + ?Sized>(
    poly: &ConvexPolygon,
    density: &D,
    t: f64,
    resolution: usize,
) -> Result<(Point, f64)> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "integration resolution must be at least 16, got {resolution}"
        )));
    }
    let grid = IntegrationGrid::over_bounding_box(poly, resolution)
        .ok_or_else(|| Error::InvalidArgument("cannot integrate over an empty polygon".into()))?;
    let m = grid.moments(poly, density, t);
    match m.centroid() {
        Some(c) => Ok((c, m.mass)),
        None => Err(Error::DegenerateMass),
    }
}
