//! Confidence-weighted agreement on the workspace boundary `(r, θ)`.

use crate::error::{Error, Result};
use crate::geometry::normalize_angle;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Variances below this are clamped before inverting.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Half-width (m) and orientation (rad) of the square workspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTuple {
    pub radius: f64,
    pub orientation: f64,
}

impl BoundaryTuple {
    pub fn new(radius: f64, orientation: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("boundary radius must be positive, got {radius}")));
        }
        if !orientation.is_finite() {
            return Err(Error::InvalidArgument("boundary orientation must be finite".into()));
        }
        Ok(Self {
            radius,
            orientation: normalize_angle(orientation),
        })
    }

    /// Largest of the radius gap and the shortest angular gap.
    pub fn distance(&self, other: &BoundaryTuple) -> f64 {
        (self.radius - other.radius)
            .abs()
            .max(normalize_angle(self.orientation - other.orientation).abs())
    }

    /// Mean radius and circular mean orientation.
    pub fn mean(tuples: &[BoundaryTuple]) -> Option<BoundaryTuple> {
        if tuples.is_empty() {
            return None;
        }
        let n = tuples.len() as f64;
        let radius = tuples.iter().map(|b| b.radius).sum::<f64>() / n;
        let reference = tuples[0].orientation;
        let offset = tuples
            .iter()
            .map(|b| normalize_angle(b.orientation - reference))
            .sum::<f64>()
            / n;
        Some(BoundaryTuple {
            radius,
            orientation: normalize_angle(reference + offset),
        })
    }
}

/// Undirected communication graph over robots `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    adjacency: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) references a robot outside 0..{n}")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on robot {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adjacency })
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Self { adjacency }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("path edges are in range")
    }

    pub fn ring(n: usize) -> Self {
        if n < 3 {
            return Self::path(n);
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges).expect("ring edges are in range")
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn hops_from(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::from([start]);
        dist[start] = Some(0);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.hops_from(0).iter().all(Option::is_some)
    }

    /// Longest shortest path, `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.len() {
            for d in self.hops_from(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// `0.5 / d_max`, or 1 for an edgeless graph.
    pub fn default_alpha(&self) -> f64 {
        match self.max_degree() {
            0 => 1.0,
            d => 0.5 / d as f64,
        }
    }
}

fn normalized_weights(variances: &[f64]) -> Result<Vec<f64>> {
    let mut precision = Vec::with_capacity(variances.len());
    for (i, &v) in variances.iter().enumerate() {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("variance of robot {i} must be non-negative, got {v}")));
        }
        precision.push(1.0 / v.max(VARIANCE_FLOOR));
    }
    let max = precision.iter().copied().fold(0.0, f64::max);
    Ok(precision.into_iter().map(|p| p / max).collect())
}

fn check_inputs(proposals: &[BoundaryTuple], variances: &[f64], graph: &CommGraph, alpha: f64) -> Result<Vec<f64>> {
    if variances.len() != proposals.len() {
        return Err(Error::LengthMismatch {
            expected: proposals.len(),
            actual: variances.len(),
        });
    }
    if graph.len() != proposals.len() {
        return Err(Error::LengthMismatch {
            expected: proposals.len(),
            actual: graph.len(),
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("consensus step size must lie in (0, 1], got {alpha}")));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let w = normalized_weights(variances)?;
    for i in 0..graph.len() {
        let load: f64 = graph.neighbors(i).iter().map(|&j| w[j]).sum();
        if alpha * load > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "step size {alpha} gives robot {i} a neighbour weight of {}; it must not exceed 1",
                alpha * load
            )));
        }
    }
    Ok(w)
}

fn step_with_weights(proposals: &[BoundaryTuple], w: &[f64], graph: &CommGraph, alpha: f64) -> Vec<BoundaryTuple> {
    proposals
        .iter()
        .enumerate()
        .map(|(i, bi)| {
            let (mut dr, mut dth) = (0.0, 0.0);
            for &j in graph.neighbors(i) {
                dr += w[j] * (proposals[j].radius - bi.radius);
                dth += w[j] * normalize_angle(proposals[j].orientation - bi.orientation);
            }
            BoundaryTuple {
                radius: bi.radius + alpha * dr,
                orientation: normalize_angle(bi.orientation + alpha * dth),
            }
        })
        .collect()
}

/// One synchronous round: `b_i ← b_i + α Σ_{j∈N_i} ŵ_j (b_j − b_i)`, with
/// `ŵ_j` the precision of robot `j` relative to the most confident robot.
pub fn consensus_step(
    proposals: &[BoundaryTuple],
    variances: &[f64],
    graph: &CommGraph,
    alpha: f64,
) -> Result<Vec<BoundaryTuple>> {
    let w = check_inputs(proposals, variances, graph, alpha)?;
    Ok(step_with_weights(proposals, &w, graph, alpha))
}

/// Combined spread: the larger of the radius range and the widest pairwise
/// angular gap.
pub fn spread(states: &[BoundaryTuple]) -> f64 {
    let (lo, hi) = states
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(b.radius), hi.max(b.radius)));
    let mut angular: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            angular = angular.max(normalize_angle(a.orientation - b.orientation).abs());
        }
    }
    if states.is_empty() {
        0.0
    } else {
        (hi - lo).max(angular)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutcome {
    /// Mean of the final per-robot states.
    pub agreed: BoundaryTuple,
    /// Each robot's own final state.
    pub states: Vec<BoundaryTuple>,
    pub iterations: usize,
    /// Spread before the first round and after every round.
    pub trace: Vec<f64>,
}

/// Iterates rounds until the spread drops below `tolerance`.
///
/// Orientations are unwrapped once relative to robot 0's proposal and then
/// averaged linearly, which matches the shortest-arc round while proposals
/// span less than a half-turn and cannot stall on antipodal splits. The
/// trace measures orientation spread on the unwrapped values.
pub fn run_consensus(
    initial: &[BoundaryTuple],
    variances: &[f64],
    graph: &CommGraph,
    alpha: f64,
    tolerance: f64,
    max_iters: usize,
) -> Result<ConsensusOutcome> {
    if initial.is_empty() {
        return Err(Error::InvalidArgument("consensus needs at least one robot".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("consensus tolerance must be positive, got {tolerance}")));
    }
    let w = check_inputs(initial, variances, graph, alpha)?;
    let reference = initial[0].orientation;
    let mut radius: Vec<f64> = initial.iter().map(|b| b.radius).collect();
    let mut angle: Vec<f64> = initial
        .iter()
        .map(|b| reference + normalize_angle(b.orientation - reference))
        .collect();
    let width = |v: &[f64]| {
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
        hi - lo
    };
    let mut trace = vec![width(&radius).max(width(&angle))];
    let mut iterations = 0;
    while *trace.last().unwrap() >= tolerance {
        if iterations == max_iters {
            return Err(Error::NonConvergence { iterations, trace });
        }
        radius = linear_round(&radius, &w, graph, alpha);
        angle = linear_round(&angle, &w, graph, alpha);
        iterations += 1;
        trace.push(width(&radius).max(width(&angle)));
    }
    let states: Vec<BoundaryTuple> = radius
        .iter()
        .zip(&angle)
        .map(|(&r, &a)| BoundaryTuple {
            radius: r,
            orientation: normalize_angle(a),
        })
        .collect();
    Ok(ConsensusOutcome {
        agreed: BoundaryTuple::mean(&states).unwrap(),
        states,
        iterations,
        trace,
    })
}

fn linear_round(values: &[f64], w: &[f64], graph: &CommGraph, alpha: f64) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| x + alpha * graph.neighbors(i).iter().map(|&j| w[j] * (values[j] - x)).sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use aoc_oracle::consensus_matrix_limit;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn radii(rs: &[f64]) -> Vec<BoundaryTuple> {
        rs.iter().map(|&r| BoundaryTuple::new(r, 0.0).unwrap()).collect()
    }

    fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> CommGraph {
        // random spanning tree plus extra edges
        let mut edges = Vec::new();
        for i in 1..n {
            edges.push((rng.random_range(0..i), i));
        }
        for _ in 0..rng.random_range(0..=n) {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b {
                edges.push((a, b));
            }
        }
        CommGraph::new(n, &edges).unwrap()
    }

    #[test]
    fn identical_proposals_are_a_fixed_point() {
        let p = vec![BoundaryTuple::new(1.7, 0.3).unwrap(); 5];
        let next = consensus_step(&p, &[0.1, 0.2, 0.3, 0.4, 0.5], &CommGraph::complete(5), 0.1).unwrap();
        assert_eq!(next, p);
        let out = run_consensus(&p, &[1.0; 5], &CommGraph::ring(5), 0.25, 1e-6, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.states, p);
    }

    #[test]
    fn two_robots_meet_in_the_middle() {
        let next = consensus_step(&radii(&[1.0, 3.0]), &[1.0, 1.0], &CommGraph::complete(2), 0.5).unwrap();
        for b in next {
            assert!((b.radius - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_step_on_complete_graph_averages_in_one_round() {
        let rs = [0.4, 1.9, 2.2, 3.5, 0.8];
        let n = rs.len();
        let mean = rs.iter().sum::<f64>() / n as f64;
        let next = consensus_step(&radii(&rs), &vec![0.3; n], &CommGraph::complete(n), 1.0 / n as f64).unwrap();
        for b in next {
            assert!((b.radius - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn path_graph_limit_matches_matrix_oracle() {
        let g = CommGraph::path(4);
        let out = run_consensus(&radii(&[1.0, 2.0, 3.0, 4.0]), &[1.0; 4], &g, 0.25, 1e-6, 10_000).unwrap();
        let adj: Vec<Vec<usize>> = (0..4).map(|i| g.neighbors(i).to_vec()).collect();
        let limit = consensus_matrix_limit(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4], &adj, 0.25).unwrap();
        assert!((1.0..=4.0).contains(&out.agreed.radius));
        assert!((out.agreed.radius - limit).abs() < 1e-6);
    }

    #[test]
    fn limit_matches_oracle_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(2..=12);
            let g = random_connected(&mut rng, n);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
            let variances: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let alpha = g.default_alpha();
            let out = run_consensus(&radii(&values), &variances, &g, alpha, 1e-9, 1_000_000).unwrap();
            let adj: Vec<Vec<usize>> = (0..n).map(|i| g.neighbors(i).to_vec()).collect();
            let limit = consensus_matrix_limit(&values, &variances, &adj, alpha).unwrap();
            assert!((out.agreed.radius - limit).abs() < 1e-6, "{} vs {limit}", out.agreed.radius);
            assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn small_scenario_converges_within_budget() {
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(1.0, 1.0).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rs: Vec<f64> = (0..4).map(|_| Distribution::<f64>::sample(&normal, &mut rng).max(0.1)).collect();
            let g = CommGraph::complete(4);
            let out = run_consensus(&radii(&rs), &[0.01; 4], &g, g.default_alpha(), 1e-6, 200).unwrap();
            let lo = rs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(out.agreed.radius >= lo && out.agreed.radius <= hi);
            // regression bound measured on these seeds
            assert!(out.iterations <= 30, "{}", out.iterations);
        }
    }

    #[test]
    fn confident_robot_dominates() {
        let rs = [1.0, 2.0, 3.0, 4.0];
        let mut vars = [1.0; 4];
        vars[0] = 0.01;
        let g = CommGraph::complete(4);
        let out = run_consensus(&radii(&rs), &vars, &g, g.default_alpha(), 1e-9, 100_000).unwrap();
        let mean = 2.5;
        assert!((out.agreed.radius - 1.0).abs() < (mean - 1.0));
    }

    #[test]
    fn orientations_wrap_through_pi() {
        let p = vec![BoundaryTuple::new(1.0, 3.0).unwrap(), BoundaryTuple::new(1.0, -3.0).unwrap()];
        let out = run_consensus(&p, &[1.0, 1.0], &CommGraph::complete(2), 0.5, 1e-9, 100).unwrap();
        assert!(out.agreed.orientation.abs() > 3.0, "{}", out.agreed.orientation);
    }

    #[test]
    fn guards() {
        let p = radii(&[1.0, 2.0, 3.0]);
        let g = CommGraph::complete(3);
        assert!(consensus_step(&p, &[1.0; 3], &g, 0.0).is_err());
        assert!(consensus_step(&p, &[1.0; 3], &g, 1.5).is_err());
        // two neighbours at full weight with α = 0.75 overshoots
        assert!(consensus_step(&p, &[1.0; 3], &g, 0.75).is_err());
        let split = CommGraph::new(3, &[(0, 1)]).unwrap();
        assert_eq!(consensus_step(&p, &[1.0; 3], &split, 0.25).unwrap_err(), Error::Disconnected);
        // zero variance is clamped rather than rejected
        assert!(consensus_step(&p, &[0.0, 1.0, 1.0], &g, 0.25).is_ok());
        assert!(consensus_step(&p, &[-1.0, 1.0, 1.0], &g, 0.25).is_err());
        assert!(matches!(
            run_consensus(&p, &[1.0; 3], &CommGraph::path(3), 0.01, 1e-12, 3),
            Err(Error::NonConvergence { iterations: 3, ref trace }) if trace.len() == 4
        ));
    }

    #[test]
    fn antipodal_headings_still_agree() {
        let p: Vec<BoundaryTuple> = [0.0, 3.1, -3.1, 1.6, -1.6, 0.2]
            .iter()
            .map(|&a| BoundaryTuple::new(1.0, a).unwrap())
            .collect();
        let g = CommGraph::complete(6);
        let out = run_consensus(&p, &[1.0; 6], &g, g.default_alpha(), 1e-9, 10_000).unwrap();
        assert!(spread(&out.states) < 1e-9);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_round_agrees_with_run_within_a_half_turn() {
        let p: Vec<BoundaryTuple> = [0.1, 0.9, -0.4].iter().map(|&a| BoundaryTuple::new(2.0, a).unwrap()).collect();
        let g = CommGraph::complete(3);
        let stepped = consensus_step(&p, &[1.0; 3], &g, 0.25).unwrap();
        let run = run_consensus(&p, &[1.0; 3], &g, 0.25, 1e-12, 1).unwrap_err();
        assert!(matches!(run, Error::NonConvergence { .. }));
        let once = run_consensus(&stepped, &[1.0; 3], &g, 0.25, 10.0, 1).unwrap();
        assert_eq!(once.iterations, 0);
        let mean = BoundaryTuple::mean(&stepped).unwrap().orientation;
        assert!((mean - (0.1 + 0.9 - 0.4) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn graph_shapes() {
        assert_eq!(CommGraph::path(5).diameter(), Some(4));
        assert_eq!(CommGraph::ring(6).diameter(), Some(3));
        assert_eq!(CommGraph::complete(6).diameter(), Some(1));
        assert_eq!(CommGraph::new(3, &[(0, 1)]).unwrap().diameter(), None);
        assert!(CommGraph::new(3, &[(1, 1)]).is_err());
        assert_eq!(CommGraph::path(3).neighbors(0), &[1]);
    }

    proptest! {
        #[test]
        fn rounds_stay_in_hull_and_contract(
            rs in prop::collection::vec(0.1..10.0f64, 2..10),
            vs in prop::collection::vec(1e-4..2.0f64, 10),
            th in prop::collection::vec(-1.5..1.5f64, 10),
            ring in any::<bool>(),
        ) {
            let n = rs.len();
            let g = if ring { CommGraph::ring(n) } else { CommGraph::complete(n) };
            let mut p: Vec<BoundaryTuple> =
                rs.iter().zip(&th).map(|(&r, &t)| BoundaryTuple::new(r, t).unwrap()).collect();
            let v = &vs[..n];
            let alpha = 1.0 / g.max_degree() as f64;
            for _ in 0..20 {
                let next = consensus_step(&p, v, &g, alpha).unwrap();
                let lo = p.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min);
                let hi = p.iter().map(|b| b.radius).fold(f64::NEG_INFINITY, f64::max);
                for b in &next {
                    prop_assert!(b.radius >= lo - 1e-12 && b.radius <= hi + 1e-12);
                }
                prop_assert!(spread(&next) <= spread(&p) + 1e-12);
                p = next;
            }
        }
    }
}
