use super::{normalize_angle, FrameTransform, IntegrationGrid, Point, GEOM_TOL};
use crate::error::{Error, Result};

/// Closed half-plane `{q : normal·q ≤ offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    normal: Point,
    offset: f64,
}

impl HalfPlane {
    /// Normalizes `normal`; fails for a zero or non-finite normal.
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0 && len.is_finite() && offset.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "half-plane needs a finite non-zero normal, got {normal:?}"
            )));
        }
        Ok(Self {
            normal: normal * (1.0 / len),
            offset: offset / len,
        })
    }

    /// Points at least as close to `own` as to `other`.
    pub fn bisector(own: Point, other: Point) -> Result<Self> {
        let dir = other - own;
        let len = dir.norm();
        if len <= GEOM_TOL {
            return Err(Error::InvalidArgument(format!(
                "bisector of coincident points {own:?}, {other:?}"
            )));
        }
        let normal = dir * (1.0 / len);
        Ok(Self {
            normal,
            offset: normal.dot((own + other) * 0.5),
        })
    }

    pub fn normal(&self) -> Point {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance; negative inside.
    #[inline]
    pub fn signed_distance(&self, q: Point) -> f64 {
        self.normal.dot(q) - self.offset
    }

    pub fn contains(&self, q: Point) -> bool {
        self.signed_distance(q) <= GEOM_TOL
    }

    /// The opposite closed half-plane.
    pub fn complement(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }
}

/// Convex polygon with counter-clockwise vertices. May be empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Builds a polygon from vertices in either orientation.
    ///
    /// Near-duplicate vertices are merged. Input that collapses to fewer than
    /// three vertices or to zero area yields the empty polygon; input that is
    /// not convex is rejected.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if let Some(bad) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite vertex {bad:?}")));
        }
        let mut vertices = dedup(vertices);
        if vertices.len() < 3 {
            return Ok(Self::empty());
        }
        let area = signed_area(&vertices);
        if area.abs() <= GEOM_TOL * GEOM_TOL {
            return Ok(Self::empty());
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn < -GEOM_TOL * (b - a).norm().max((c - b).norm()).max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "polygon is not convex at vertex {b:?}"
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).max(0.0)
    }

    /// Area centroid (uniform density). `None` when empty.
    pub fn centroid(&self) -> Option<Point> {
        if self.is_empty() {
            return None;
        }
        // Shift to the first vertex to keep the products small.
        let o = self.vertices[0];
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let (p, q) = (p - o, q - o);
            let w = p.cross(q);
            a += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Some(o + Point::new(cx, cy) * (1.0 / (3.0 * a)))
    }

    /// Closed containment with [`GEOM_TOL`] slack.
    pub fn contains(&self, q: Point) -> bool {
        if self.is_empty() {
            return false;
        }
        self.edges().all(|(a, b)| {
            let e = b - a;
            e.cross(q - a) >= -GEOM_TOL * e.norm()
        })
    }

    /// `(min, max)` corners, `None` when empty.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (
                Point::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        }))
    }

    pub fn transformed(&self, t: &FrameTransform) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| t.apply(*p)).collect(),
        }
    }

    pub fn translated(&self, by: Point) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| *p + by).collect(),
        }
    }

    pub fn clip(&self, hp: &HalfPlane) -> Self {
        clip_halfplane(self, hp)
    }

    /// Intersection with another convex polygon.
    pub fn intersection(&self, other: &ConvexPolygon) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        let mut out = self.clone();
        for (a, b) in other.edges() {
            // Interior lies to the left of each CCW edge.
            let e = b - a;
            let hp = HalfPlane::new(Point::new(e.y, -e.x), Point::new(e.y, -e.x).dot(a))
                .expect("polygon edges have non-zero length");
            out = out.clip(&hp);
            if out.is_empty() {
                break;
            }
        }
        out
    }

    /// `area(self Δ other)`, computed exactly through convex intersection.
    pub fn symmetric_difference_area(&self, other: &ConvexPolygon) -> f64 {
        let common = self.intersection(other).area();
        (self.area() + other.area() - 2.0 * common).max(0.0)
    }
}

fn signed_area(vertices: &[Point]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let o = vertices[0];
    let n = vertices.len();
    let twice: f64 = (1..n - 1)
        .map(|k| (vertices[k] - o).cross(vertices[k + 1] - o))
        .sum();
    0.5 * twice
}

fn dedup(mut vertices: Vec<Point>) -> Vec<Point> {
    vertices.dedup_by(|b, a| a.distance(*b) <= GEOM_TOL);
    while vertices.len() > 1 && vertices[0].distance(*vertices.last().unwrap()) <= GEOM_TOL {
        vertices.pop();
    }
    vertices
}

/// `poly ∩ hp` by one Sutherland–Hodgman pass. The result is convex and may be
/// empty.
pub fn clip_halfplane(poly: &ConvexPolygon, hp: &HalfPlane) -> ConvexPolygon {
    let verts = poly.vertices();
    if verts.is_empty() {
        return ConvexPolygon::empty();
    }
    let dist: Vec<f64> = verts.iter().map(|p| hp.signed_distance(*p)).collect();
    if dist.iter().all(|d| *d <= 0.0) {
        return poly.clone();
    }
    if dist.iter().all(|d| *d >= 0.0) {
        return ConvexPolygon::empty();
    }
    let n = verts.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (a, b) = (verts[k], verts[(k + 1) % n]);
        let (da, db) = (dist[k], dist[(k + 1) % n]);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a.lerp(b, da / (da - db)));
        }
    }
    let out = dedup(out);
    if out.len() < 3 || signed_area(&out) <= GEOM_TOL * GEOM_TOL {
        return ConvexPolygon::empty();
    }
    ConvexPolygon { vertices: out }
}

/// Square of half-width `half_width` centred on `center`, rotated
/// counter-clockwise by `orientation`; the inscribed circle has radius
/// `half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceSquare {
    pub center: Point,
    pub half_width: f64,
    pub orientation: f64,
}

impl WorkspaceSquare {
    pub fn new(center: Point, half_width: f64, orientation: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "workspace half-width must be positive, got {half_width}"
            )));
        }
        if !center.is_finite() || !orientation.is_finite() {
            return Err(Error::InvalidArgument("non-finite workspace parameters".into()));
        }
        Ok(Self {
            center,
            half_width,
            orientation: normalize_angle(orientation),
        })
    }

    /// Corner that the local `u`/`v` axes of the square start from.
    pub fn corner(&self) -> Point {
        let r = self.half_width;
        self.center + Point::new(-r, -r).rotated(self.orientation)
    }

    pub fn polygon(&self) -> ConvexPolygon {
        let r = self.half_width;
        let verts = [(-r, -r), (r, -r), (r, r), (-r, r)]
            .into_iter()
            .map(|(x, y)| self.center + Point::new(x, y).rotated(self.orientation))
            .collect();
        ConvexPolygon { vertices: verts }
    }

    /// Integration grid aligned with the square's sides, `resolution` cells
    /// per side.
    pub fn grid(&self, resolution: usize) -> IntegrationGrid {
        let cell = 2.0 * self.half_width / resolution as f64;
        IntegrationGrid::new(self.corner(), self.orientation, cell, cell)
    }

    /// Membership by the diamond-norm condition
    /// `|dx + dy| + |dx − dy| ≤ 2r`, evaluated after undoing the rotation.
    pub fn contains_by_norm_condition(&self, q: Point) -> bool {
        let d = (q - self.center).rotated(-self.orientation);
        (d.x + d.y).abs() + (d.x - d.y).abs() <= 2.0 * self.half_width
    }
}

/// The square `{q : max(|dx|, |dy|) ≤ r}` around `anchor`, rotated by `theta`.
pub fn build_workspace_square(anchor: Point, r: f64, theta: f64) -> Result<ConvexPolygon> {
    Ok(WorkspaceSquare::new(anchor, r, theta)?.polygon())
}
