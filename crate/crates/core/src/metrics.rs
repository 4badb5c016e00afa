//! Locational cost, regret and partition comparison.

use crate::density::Density;
use crate::error::{Error, Result};
use crate::geometry::{FrameTransform, IntegrationGrid, Point};
use crate::partition::PartitionResult;
use crate::sim::{prepare, reference_cost, ScenarioConfig};

/// `Σ_i ∫_{V_i} ½‖q − p_i‖² φ(q, t) dq` on a shared integration grid.
pub fn locational_cost_on<D: Density + ?Sized>(
    grid: &IntegrationGrid,
    positions: &[Point],
    partition: &PartitionResult,
    density: &D,
    t: f64,
) -> Result<f64> {
    if positions.len() != partition.cells.len() {
        return Err(Error::LengthMismatch {
            expected: partition.cells.len(),
            actual: positions.len(),
        });
    }
    Ok(partition
        .cells
        .iter()
        .zip(positions)
        .map(|(cell, &p)| grid.cost_about(cell, p, density, t))
        .sum())
}

/// Locational cost on a `resolution × resolution` grid spanning the
/// bounding box of the partition.
pub fn locational_cost<D: Density + ?Sized>(
    positions: &[Point],
    partition: &PartitionResult,
    density: &D,
    t: f64,
    resolution: usize,
) -> Result<f64> {
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for (a, b) in partition.cells.iter().filter_map(|c| c.bounding_box()) {
        lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    if !(hi.x > lo.x && hi.y > lo.y) {
        return Ok(0.0);
    }
    let n = resolution as f64;
    let grid = IntegrationGrid::new(lo, 0.0, (hi.x - lo.x) / n, (hi.y - lo.y) / n);
    locational_cost_on(&grid, positions, partition, density, t)
}

/// `r(t) = H(t) − H*` and `R(T) = Σ r(t)`.
pub fn regret_series(costs: &[f64], optimal_cost: f64) -> (Vec<f64>, f64) {
    let r: Vec<f64> = costs.iter().map(|h| h - optimal_cost).collect();
    let total = r.iter().sum();
    (r, total)
}

/// Cost of the Lloyd fixed point reached by the noiseless baseline from the
/// config's start positions.
pub fn optimal_cost_oracle(config: &ScenarioConfig) -> Result<f64> {
    let setup = prepare(config)?;
    reference_cost(config, &setup)
}

/// `R(2T) / R(T)` on a cumulative series of length at least `2T`.
pub fn growth_ratio(regret: &[f64], horizon: usize) -> Result<f64> {
    if horizon == 0 || regret.len() < 2 * horizon {
        return Err(Error::InvalidArgument(format!(
            "need {} regret samples, got {}",
            2 * horizon,
            regret.len()
        )));
    }
    let r_t: f64 = regret[..horizon].iter().sum();
    let r_2t: f64 = regret[..2 * horizon].iter().sum();
    Ok(r_2t / r_t)
}

/// Cumulative regret at one noise level, over matched trials.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLevel {
    pub sigma: f64,
    pub horizon: usize,
    pub cumulative_regret: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    /// Levels sorted by `sigma`, with their mean `R(T)`.
    pub means: Vec<(f64, f64)>,
    pub non_decreasing: bool,
    /// Least-squares `c` in `R ≈ c √(T (1 + σ²))`.
    pub fitted_constant: f64,
    /// `mean R / (c √(T (1 + σ²)))` per level.
    pub residual_ratios: Vec<f64>,
}

pub fn regret_noise_check(levels: &[NoiseLevel]) -> Result<NoiseReport> {
    if levels.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 noise levels, got {}", levels.len())));
    }
    let horizon = levels[0].horizon;
    if levels.iter().any(|l| l.horizon != horizon) {
        return Err(Error::InvalidArgument("noise levels were run with different horizons".into()));
    }
    let trials = levels[0].cumulative_regret.len();
    if trials == 0 || levels.iter().any(|l| l.cumulative_regret.len() != trials) {
        return Err(Error::InvalidArgument("noise levels need the same non-zero number of trials".into()));
    }
    let mut means: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| (l.sigma, l.cumulative_regret.iter().sum::<f64>() / trials as f64))
        .collect();
    means.sort_by(|a, b| a.0.total_cmp(&b.0));
    let non_decreasing = means.windows(2).all(|w| w[1].1 >= w[0].1);
    let basis: Vec<f64> = means.iter().map(|(s, _)| (horizon as f64 * (1.0 + s * s)).sqrt()).collect();
    let num: f64 = means.iter().zip(&basis).map(|((_, r), b)| r * b).sum();
    let den: f64 = basis.iter().map(|b| b * b).sum();
    let c = num / den;
    let residual_ratios = means.iter().zip(&basis).map(|((_, r), b)| r / (c * b)).collect();
    Ok(NoiseReport {
        means,
        non_decreasing,
        fitted_constant: c,
        residual_ratios,
    })
}

/// Largest `area(T_i(a_i) Δ b_i)` over robots, computed exactly on the
/// convex cells.
pub fn partition_difference(a: &PartitionResult, b: &PartitionResult, transforms: &[FrameTransform]) -> Result<f64> {
    if a.cells.len() != b.cells.len() {
        return Err(Error::LengthMismatch {
            expected: a.cells.len(),
            actual: b.cells.len(),
        });
    }
    if transforms.len() != a.cells.len() {
        return Err(Error::LengthMismatch {
            expected: a.cells.len(),
            actual: transforms.len(),
        });
    }
    Ok(a.cells
        .iter()
        .zip(&b.cells)
        .zip(transforms)
        .map(|((ca, cb), t)| ca.transformed(t).symmetric_difference_area(cb))
        .fold(0.0, f64::max))
}
