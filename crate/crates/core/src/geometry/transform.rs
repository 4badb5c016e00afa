use super::Point;

/// Rigid motion `p ↦ R(rotation)·p + translation`.
///
/// Used to map a robot's private frame into the simulator's global frame: the
/// rotation is the robot's initial heading and the translation its starting
/// position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    rotation: f64,
    translation: Point,
    cos: f64,
    sin: f64,
}

impl FrameTransform {
    pub fn new(rotation: f64, translation: Point) -> Self {
        let (sin, cos) = rotation.sin_cos();
        Self {
            rotation,
            translation,
            cos,
            sin,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, Point::ORIGIN)
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn translation(&self) -> Point {
        self.translation
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        self.rotate(p) + self.translation
    }

    /// Applies only the rotational part, for direction vectors.
    #[inline]
    pub fn rotate(&self, v: Point) -> Point {
        Point::new(self.cos * v.x - self.sin * v.y, self.sin * v.x + self.cos * v.y)
    }

    pub fn inverse(&self) -> Self {
        let back = Self::new(-self.rotation, Point::ORIGIN);
        Self::new(-self.rotation, -back.rotate(self.translation))
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &FrameTransform) -> Self {
        Self::new(
            self.rotation + inner.rotation,
            self.rotate(inner.translation) + self.translation,
        )
    }
}

impl Default for FrameTransform {
    fn default() -> Self {
        Self::identity()
    }
}
