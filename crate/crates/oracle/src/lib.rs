//! Slow, independent reference implementations for the coverage library.
//!
//! Everything here works on plain `(f64, f64)` tuples and closures so that it
//! never shares a code path with the production geometry, partitioning or
//! consensus routines it is used to check. Nothing in this crate is tuned for
//! speed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

pub type Vertex = (f64, f64);

/// Minimum number of Monte-Carlo samples accepted by [`OracleBudget`].
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("budget of {0} samples is below the minimum of {MIN_SAMPLES}")]
    BudgetTooSmall(usize),
    #[error("no sample fell inside the region")]
    NoAcceptedSamples,
    #[error("region has zero total weight")]
    ZeroMass,
    #[error("power iteration did not settle after {0} iterations")]
    SpectralNonConvergence(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub samples: usize,
    pub seed: u64,
}

impl OracleBudget {
    pub fn new(samples: usize, seed: u64) -> Result<Self, OracleError> {
        if samples < MIN_SAMPLES {
            return Err(OracleError::BudgetTooSmall(samples));
        }
        Ok(Self { samples, seed })
    }
}

fn bbox(poly: &[Vertex]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in poly {
        b.0 = b.0.min(x);
        b.1 = b.1.min(y);
        b.2 = b.2.max(x);
        b.3 = b.3.max(y);
    }
    b
}

/// Strict inside test for a convex polygon given in either orientation.
///
/// Degenerate (zero-area) polygons contain nothing.
pub fn inside_convex(poly: &[Vertex], q: Vertex) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let cross = (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0);
        if cross == 0.0 {
            return false;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

/// Result of a Monte-Carlo centroid estimate.
#[derive(Debug, Clone, Copy)]
pub struct McCentroid {
    pub centroid: Vertex,
    pub mass: f64,
    /// Delta-method standard error of each centroid coordinate.
    pub std_error: Vertex,
    pub accepted: usize,
}

/// Density-weighted centroid and mass by rejection sampling over the bounding
/// box of `poly`.
pub fn mc_weighted_centroid<F>(
    poly: &[Vertex],
    density: F,
    budget: OracleBudget,
) -> Result<McCentroid, OracleError>
where
    F: Fn(f64, f64) -> f64,
{
    let (x0, y0, x1, y1) = bbox(poly);
    let box_area = (x1 - x0) * (y1 - y0);
    let mut rng = ChaCha12Rng::seed_from_u64(budget.seed);
    let mut samples = Vec::with_capacity(budget.samples);
    for _ in 0..budget.samples {
        let q = (rng.random_range(x0..=x1), rng.random_range(y0..=y1));
        if inside_convex(poly, q) {
            samples.push((q, density(q.0, q.1)));
        }
    }
    if samples.is_empty() {
        return Err(OracleError::NoAcceptedSamples);
    }
    let (mut w, mut wx, mut wy) = (0.0, 0.0, 0.0);
    for &((x, y), phi) in &samples {
        w += phi;
        wx += phi * x;
        wy += phi * y;
    }
    if w <= 0.0 {
        return Err(OracleError::ZeroMass);
    }
    let (cx, cy) = (wx / w, wy / w);
    let (mut vx, mut vy) = (0.0, 0.0);
    for &((x, y), phi) in &samples {
        vx += (phi * (x - cx)).powi(2);
        vy += (phi * (y - cy)).powi(2);
    }
    Ok(McCentroid {
        centroid: (cx, cy),
        mass: box_area * w / budget.samples as f64,
        std_error: (vx.sqrt() / w, vy.sqrt() / w),
        accepted: samples.len(),
    })
}

/// Monte-Carlo estimate of `sum_i ∫_{V_i} ½‖q − p_i‖² φ(q) dq`, where each
/// sample is assigned to its nearest site by brute force.
///
/// Returns `(estimate, standard_error)`.
pub fn mc_locational_cost<F>(
    sites: &[Vertex],
    workspace: &[Vertex],
    density: F,
    budget: OracleBudget,
) -> Result<(f64, f64), OracleError>
where
    F: Fn(f64, f64) -> f64,
{
    if sites.is_empty() {
        return Err(OracleError::InvalidInput("no sites".into()));
    }
    let (x0, y0, x1, y1) = bbox(workspace);
    let box_area = (x1 - x0) * (y1 - y0);
    let mut rng = ChaCha12Rng::seed_from_u64(budget.seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut accepted = 0usize;
    for _ in 0..budget.samples {
        let q = (rng.random_range(x0..=x1), rng.random_range(y0..=y1));
        let value = if inside_convex(workspace, q) {
            accepted += 1;
            let d2 = sites
                .iter()
                .map(|p| (q.0 - p.0).powi(2) + (q.1 - p.1).powi(2))
                .fold(f64::INFINITY, f64::min);
            0.5 * d2 * density(q.0, q.1)
        } else {
            0.0
        };
        sum += value;
        sum_sq += value * value;
    }
    if accepted == 0 {
        return Err(OracleError::NoAcceptedSamples);
    }
    let n = budget.samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((box_area * mean, box_area * (var / n).sqrt()))
}

/// Nearest-site labels on a regular grid laid over a workspace's bounding box.
#[derive(Debug, Clone)]
pub struct LabelGrid {
    pub origin: Vertex,
    pub cell: Vertex,
    pub resolution: usize,
    /// Row-major (`row * resolution + col`); `None` for cells whose centre lies
    /// outside the workspace.
    pub labels: Vec<Option<usize>>,
}

impl LabelGrid {
    pub fn center(&self, row: usize, col: usize) -> Vertex {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell.0,
            self.origin.1 + (row as f64 + 0.5) * self.cell.1,
        )
    }

    pub fn label(&self, row: usize, col: usize) -> Option<usize> {
        self.labels[row * self.resolution + col]
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Option<usize>)> + '_ {
        (0..self.resolution)
            .flat_map(move |r| (0..self.resolution).map(move |c| (r, c, self.label(r, c))))
    }
}

/// Labels every grid cell with the index of its nearest site, ties going to
/// the lowest index.
pub fn grid_nearest_site(sites: &[Vertex], workspace: &[Vertex], resolution: usize) -> LabelGrid {
    let (x0, y0, x1, y1) = bbox(workspace);
    let cell = ((x1 - x0) / resolution as f64, (y1 - y0) / resolution as f64);
    let mut grid = LabelGrid {
        origin: (x0, y0),
        cell,
        resolution,
        labels: vec![None; resolution * resolution],
    };
    for row in 0..resolution {
        for col in 0..resolution {
            let q = grid.center(row, col);
            if !inside_convex(workspace, q) {
                continue;
            }
            let mut best = None;
            let mut best_d = f64::INFINITY;
            for (k, p) in sites.iter().enumerate() {
                let d = (q.0 - p.0).powi(2) + (q.1 - p.1).powi(2);
                if d < best_d {
                    best_d = d;
                    best = Some(k);
                }
            }
            grid.labels[row * resolution + col] = best;
        }
    }
    grid
}

/// Limit of the confidence-weighted linear consensus iteration
/// `x_i ← x_i + α Σ_{j∈N_i} ŵ_j (x_j − x_i)`, where `ŵ_j` is robot `j`'s
/// precision divided by the largest precision in the team.
///
/// The explicit update matrix is built and applied repeatedly to the initial
/// values until every component agrees to within `1e-10`.
pub fn consensus_matrix_limit(
    values: &[f64],
    variances: &[f64],
    neighbors: &[Vec<usize>],
    alpha: f64,
) -> Result<f64, OracleError> {
    const MAX_ITERS: usize = 100_000;
    const TOL: f64 = 1e-10;
    let n = values.len();
    if variances.len() != n || neighbors.len() != n || n == 0 {
        return Err(OracleError::InvalidInput("length mismatch".into()));
    }
    let precision: Vec<f64> = variances.iter().map(|v| 1.0 / v.max(1e-9)).collect();
    let max_p = precision.iter().cloned().fold(0.0, f64::max);
    let weight: Vec<f64> = precision.iter().map(|p| p / max_p).collect();

    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut off = 0.0;
        for &j in &neighbors[i] {
            matrix[i][j] += alpha * weight[j];
            off += alpha * weight[j];
        }
        matrix[i][i] += 1.0 - off;
    }

    let mut state = values.to_vec();
    for _ in 0..MAX_ITERS {
        let lo = state.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = state.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < TOL {
            return Ok(state.iter().sum::<f64>() / n as f64);
        }
        state = matrix
            .iter()
            .map(|row| row.iter().zip(&state).map(|(m, x)| m * x).sum())
            .collect();
    }
    Err(OracleError::SpectralNonConvergence(MAX_ITERS))
}

/// Closed-form mass and centroid of `base + amplitude·exp(−‖q−c‖²/(2σ²))`
/// over an axis-aligned rectangle, using the error function.
pub fn gaussian_rect_moments(
    rect: (f64, f64, f64, f64),
    base: f64,
    amplitude: f64,
    sigma: f64,
    center: Vertex,
) -> (Vertex, f64) {
    use statrs::function::erf::erf;
    let (x0, y0, x1, y1) = rect;
    let s2 = std::f64::consts::SQRT_2 * sigma;
    // ∫ exp(-(t-c)²/2σ²) dt and ∫ t exp(-(t-c)²/2σ²) dt over [a, b]
    let axis = |a: f64, b: f64, c: f64| {
        let zero = sigma * (std::f64::consts::PI / 2.0).sqrt() * (erf((b - c) / s2) - erf((a - c) / s2));
        let g = |t: f64| (-(t - c).powi(2) / (2.0 * sigma * sigma)).exp();
        let first = c * zero + sigma * sigma * (g(a) - g(b));
        (zero, first)
    };
    let (ix0, ix1) = axis(x0, x1, center.0);
    let (iy0, iy1) = axis(y0, y1, center.1);
    let (w, h) = (x1 - x0, y1 - y0);
    let mass = base * w * h + amplitude * ix0 * iy0;
    let mx = base * h * (x1 * x1 - x0 * x0) / 2.0 + amplitude * ix1 * iy0;
    let my = base * w * (y1 * y1 - y0 * y0) / 2.0 + amplitude * ix0 * iy1;
    ((mx / mass, my / mass), mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [Vertex; 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

    #[test]
    fn uniform_square_centroid_within_three_standard_errors() {
        let est = mc_weighted_centroid(&UNIT, |_, _| 1.0, OracleBudget::new(200_000, 1).unwrap()).unwrap();
        assert!(est.centroid.0.abs() < 3.0 * est.std_error.0);
        assert!(est.centroid.1.abs() < 3.0 * est.std_error.1);
        assert!((est.mass - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        let sliver = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        let err = mc_weighted_centroid(&sliver, |_, _| 1.0, OracleBudget::new(MIN_SAMPLES, 3).unwrap());
        assert_eq!(err.unwrap_err(), OracleError::NoAcceptedSamples);
    }

    #[test]
    fn small_budgets_are_refused() {
        assert_eq!(OracleBudget::new(999, 0).unwrap_err(), OracleError::BudgetTooSmall(999));
    }

    #[test]
    fn consensus_limit_of_identical_values() {
        let nbrs = vec![vec![1], vec![0, 2], vec![1]];
        let v = consensus_matrix_limit(&[2.5; 3], &[1.0; 3], &nbrs, 0.25).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn consensus_limit_equal_weights_complete_graph_is_mean() {
        let n = 5;
        let nbrs: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        let vals = [1.0, 4.0, -2.0, 7.0, 0.5];
        let v = consensus_matrix_limit(&vals, &[0.3; 5], &nbrs, 0.1).unwrap();
        assert!((v - 2.1).abs() < 1e-10);
    }

    #[test]
    fn periodic_update_matrix_does_not_settle() {
        let nbrs = vec![vec![1], vec![0]];
        let err = consensus_matrix_limit(&[1.0, 3.0], &[1.0, 1.0], &nbrs, 1.0).unwrap_err();
        assert_eq!(err, OracleError::SpectralNonConvergence(100_000));
    }

    #[test]
    fn grid_labels_split_two_symmetric_sites() {
        let grid = grid_nearest_site(&[(-0.5, 0.0), (0.5, 0.0)], &UNIT, 64);
        for (r, c, label) in grid.cells() {
            let expected = if c < 32 { 0 } else { 1 };
            assert_eq!(label, Some(expected), "cell ({r},{c})");
        }
    }

    #[test]
    fn gaussian_rect_moments_match_monte_carlo() {
        let phi = |x: f64, y: f64| 0.01 + (-((x - 0.5).powi(2) + y * y) / (2.0 * 0.09)).exp();
        let mc = mc_weighted_centroid(&UNIT, phi, OracleBudget::new(400_000, 9).unwrap()).unwrap();
        let (c, m) = gaussian_rect_moments((-1.0, -1.0, 1.0, 1.0), 0.01, 1.0, 0.3, (0.5, 0.0));
        assert!((c.0 - mc.centroid.0).abs() < 4.0 * mc.std_error.0);
        assert!((c.1 - mc.centroid.1).abs() < 4.0 * mc.std_error.1);
        assert!((m - mc.mass).abs() / m < 1e-2);
    }
}
