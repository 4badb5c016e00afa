//! Bounded Voronoi cells, both in a shared frame and reconstructed by each
//! robot in its own frame from anchor-relative reports.

use crate::consensus::BoundaryTuple;
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, HalfPlane, Point, WorkspaceSquare};
use crate::sim::RobotState;
use serde::{Deserialize, Serialize};

#[cfg(any(test, feature = "oracle"))]
pub use aoc_oracle::LabelGrid;

/// Sites closer than this are treated as coincident.
pub const MIN_SITE_SEPARATION: f64 = 1e-6;

/// What a robot broadcasts to its neighbours each round. Every coordinate is
/// in the sender's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborReport {
    pub sender: usize,
    pub position: Point,
    pub anchor_estimate: Point,
    pub anchor_variance: f64,
    pub boundary: BoundaryTuple,
    pub orientation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionFrame {
    Global,
    Local(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub cells: Vec<ConvexPolygon>,
    pub frame: PartitionFrame,
}

impl PartitionResult {
    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(ConvexPolygon::area).sum()
    }

    /// Largest intersection area over all pairs of cells.
    pub fn max_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.cells.iter().enumerate() {
            for b in &self.cells[i + 1..] {
                worst = worst.max(a.intersection(b).area());
            }
        }
        worst
    }
}

/// Each site's cell: `workspace ∩ {q : ‖q − p_i‖ ≤ ‖q − p_j‖ ∀ j ≠ i}`.
pub fn global_voronoi(positions: &[Point], workspace: &ConvexPolygon) -> Result<PartitionResult> {
    if positions.is_empty() {
        return Err(Error::InvalidArgument("partition needs at least one site".into()));
    }
    for (i, p) in positions.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidArgument(format!("site {i} is not finite")));
        }
        for (j, q) in positions.iter().enumerate().skip(i + 1) {
            if p.distance(*q) < MIN_SITE_SEPARATION {
                return Err(Error::DegenerateSites(i, j));
            }
        }
    }
    let cells = positions
        .iter()
        .enumerate()
        .map(|(i, &p)| voronoi_cell(workspace, p, positions.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| q)))
        .collect::<Result<_>>()?;
    Ok(PartitionResult {
        cells,
        frame: PartitionFrame::Global,
    })
}

fn voronoi_cell(region: &ConvexPolygon, own: Point, others: impl Iterator<Item = Point>) -> Result<ConvexPolygon> {
    let mut cell = region.clone();
    for q in others {
        if cell.is_empty() {
            break;
        }
        cell = cell.clip(&HalfPlane::bisector(own, q)?);
    }
    Ok(cell)
}

/// Neighbour `j`'s position in robot `i`'s frame, rebuilt from the vector
/// `j` measured from its own anchor estimate and hung off `i`'s estimate.
pub fn reconstruct_neighbor(own: &RobotState, report: &NeighborReport) -> Point {
    own.anchor_estimate + (report.position - report.anchor_estimate).rotated(report.orientation - own.orientation)
}

/// The square robot `i` believes it must cover, in its own frame.
pub fn local_workspace(own: &RobotState, boundary: BoundaryTuple) -> Result<WorkspaceSquare> {
    WorkspaceSquare::new(own.anchor_estimate, boundary.radius, boundary.orientation - own.orientation)
}

/// Robot `own.id`'s cell in its own frame. Every id in `neighbors` must have
/// a report; reports from robots outside `neighbors` are ignored.
pub fn anchor_oriented_cell(
    own: &RobotState,
    reports: &[NeighborReport],
    neighbors: &[usize],
    boundary: BoundaryTuple,
) -> Result<ConvexPolygon> {
    let mut chosen = Vec::with_capacity(neighbors.len());
    let mut missing = Vec::new();
    for &j in neighbors.iter().filter(|&&j| j != own.id) {
        match reports.iter().find(|r| r.sender == j) {
            Some(r) => chosen.push(r),
            None => missing.push(j),
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteInformation {
            robot: own.id,
            missing,
        });
    }
    let square = local_workspace(own, boundary)?.polygon();
    let mut cell = square;
    for r in chosen {
        if cell.is_empty() {
            break;
        }
        let q = reconstruct_neighbor(own, r);
        if own.position.distance(q) < MIN_SITE_SEPARATION {
            return Err(Error::DegenerateSites(own.id, r.sender));
        }
        cell = cell.clip(&HalfPlane::bisector(own.position, q)?);
    }
    Ok(cell)
}

/// Nearest-site labelling of a grid over the workspace, ties to the lowest
/// index. Test oracle; panics below resolution 64.
#[cfg(any(test, feature = "oracle"))]
pub fn brute_force_partition(positions: &[Point], workspace: &ConvexPolygon, resolution: usize) -> LabelGrid {
    assert!(resolution >= 64, "label grid resolution must be at least 64");
    let sites: Vec<(f64, f64)> = positions.iter().map(|&p| p.into()).collect();
    let poly: Vec<(f64, f64)> = workspace.vertices().iter().map(|&p| p.into()).collect();
    aoc_oracle::grid_nearest_site(&sites, &poly, resolution)
}
