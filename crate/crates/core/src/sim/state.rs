use crate::consensus::{BoundaryTuple, CommGraph};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, FrameTransform, Point};
use crate::partition::NeighborReport;
use rand::Rng;
use rand_distr::StandardNormal;

/// What a robot knows about itself, all in its own frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub position: Point,
    /// Heading of the robot's frame at start-up, rad.
    pub orientation: f64,
    pub anchor_estimate: Point,
    pub anchor_variance: f64,
    pub boundary: BoundaryTuple,
    pub cell: ConvexPolygon,
}

impl RobotState {
    pub fn report(&self) -> NeighborReport {
        NeighborReport {
            sender: self.id,
            position: self.position,
            anchor_estimate: self.anchor_estimate,
            anchor_variance: self.anchor_variance,
            boundary: self.boundary,
            orientation: self.orientation,
        }
    }
}

/// True anchor trajectory and the robots' measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorModel {
    pub start: Point,
    pub velocity: Point,
    sigmas: Vec<f64>,
}

impl AnchorModel {
    pub fn new(start: Point, velocity: Point, sigmas: Vec<f64>) -> Result<Self> {
        if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(format!("anchor noise sigma must be non-negative, got {s}")));
        }
        Ok(Self { start, velocity, sigmas })
    }

    pub fn position(&self, t: f64) -> Point {
        self.start + self.velocity * t
    }

    pub fn sigma(&self, robot: usize) -> f64 {
        self.sigmas[robot]
    }

    pub fn set_sigmas(&mut self, sigmas: Vec<f64>) -> Result<()> {
        *self = Self::new(self.start, self.velocity, sigmas)?;
        Ok(())
    }
}

/// Robot `robot`'s noisy view of the anchor at time `t`: the true position
/// mapped into its frame plus independent per-axis Gaussian noise. Returns
/// the estimate and its reported variance.
///
/// Two normals are drawn on every call, whatever the noise level, so that a
/// stream stays aligned across noise settings.
pub fn sample_anchor_estimate<R: Rng + ?Sized>(
    rng: &mut R,
    anchor: &AnchorModel,
    robot: usize,
    frame: &FrameTransform,
    t: f64,
) -> (Point, f64) {
    let sigma = anchor.sigma(robot);
    let zx: f64 = rng.sample(StandardNormal);
    let zy: f64 = rng.sample(StandardNormal);
    let exact = frame.inverse().apply(anchor.position(t));
    (exact + Point::new(zx, zy) * sigma, sigma * sigma)
}

/// Synchronous, lossless broadcast: every robot receives a copy of each
/// graph neighbour's current report.
pub fn exchange_reports(states: &[RobotState], graph: &CommGraph) -> Vec<Vec<NeighborReport>> {
    (0..states.len())
        .map(|i| graph.neighbors(i).iter().map(|&j| states[j].report()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Purpose};

    fn state(id: usize) -> RobotState {
        RobotState {
            id,
            position: Point::new(id as f64, 0.0),
            orientation: 0.0,
            anchor_estimate: Point::ORIGIN,
            anchor_variance: 0.0,
            boundary: BoundaryTuple::new(1.0, 0.0).unwrap(),
            cell: ConvexPolygon::empty(),
        }
    }

    #[test]
    fn zero_noise_gives_the_exact_transformed_anchor() {
        let anchor = AnchorModel::new(Point::new(2.0, 1.0), Point::ORIGIN, vec![0.0]).unwrap();
        let frame = FrameTransform::new(0.4, Point::new(-1.0, 3.0));
        let mut rng = stream(1, 0, Purpose::AnchorNoise);
        let (mean, var) = sample_anchor_estimate(&mut rng, &anchor, 0, &frame, 0.0);
        assert_eq!(var, 0.0);
        assert!(frame.apply(mean).distance(Point::new(2.0, 1.0)) < 1e-12);
    }

    #[test]
    fn empirical_spread_matches_sigma() {
        let anchor = AnchorModel::new(Point::ORIGIN, Point::ORIGIN, vec![0.1]).unwrap();
        let frame = FrameTransform::identity();
        let mut rng = stream(42, 0, Purpose::AnchorNoise);
        let samples: Vec<Point> = (0..10_000)
            .map(|_| sample_anchor_estimate(&mut rng, &anchor, 0, &frame, 0.0).0)
            .collect();
        for axis in [|p: &Point| p.x, |p: &Point| p.y] {
            let mean = samples.iter().map(axis).sum::<f64>() / samples.len() as f64;
            let var = samples.iter().map(|p| (axis(p) - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
            assert!((var.sqrt() - 0.1).abs() <= 0.005, "{}", var.sqrt());
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let anchor = AnchorModel::new(Point::ORIGIN, Point::new(0.1, 0.0), vec![0.3, 0.3]).unwrap();
        let frame = FrameTransform::new(1.0, Point::new(0.5, 0.5));
        let draw = || {
            let mut rng = stream(7, 1, Purpose::AnchorNoise);
            (0..5).map(|k| sample_anchor_estimate(&mut rng, &anchor, 1, &frame, k as f64)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn report_delivery_follows_the_graph() {
        let states: Vec<RobotState> = (0..5).map(state).collect();
        let all = exchange_reports(&states, &CommGraph::complete(5));
        assert!(all.iter().all(|r| r.len() == 4));
        let path = exchange_reports(&states[..3], &CommGraph::path(3));
        assert_eq!(path[0].len(), 1);
        assert_eq!(path[0][0].sender, 1);
    }

    #[test]
    fn reports_are_snapshots() {
        let mut states: Vec<RobotState> = (0..2).map(state).collect();
        let delivered = exchange_reports(&states, &CommGraph::complete(2));
        states[1].position = Point::new(9.0, 9.0);
        assert_eq!(delivered[0][0].position, Point::new(1.0, 0.0));
    }
}
