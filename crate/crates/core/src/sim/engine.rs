use super::config::{NoiseSigma, Orientations, Placement, ScenarioConfig, Variant};
use super::rng::{stream, Purpose};
use super::state::{exchange_reports, sample_anchor_estimate, AnchorModel, RobotState};
use crate::consensus::{run_consensus, BoundaryTuple, CommGraph, ConsensusOutcome};
use crate::controller::lloyd_step;
use crate::density::{DensityField, InFrame};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, ConvexPolygon, FrameTransform, Point, WorkspaceSquare};
use crate::partition::{anchor_oriented_cell, global_voronoi, local_workspace};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Smallest radius a robot will propose, m.
pub const MIN_PROPOSAL_RADIUS: f64 = 0.1;
/// Step budget for the reference Lloyd run.
pub const REFERENCE_MAX_STEPS: usize = 10_000;

/// Everything fixed before the first control step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    /// Global start positions.
    pub initial_positions: Vec<Point>,
    /// Robot frame → global frame. Each frame's origin is the robot's start.
    pub frames: Vec<FrameTransform>,
    pub proposals: Vec<BoundaryTuple>,
    pub graph: CommGraph,
    pub consensus: ConsensusOutcome,
}

impl TrialSetup {
    /// Boundary the team's coverage is scored against.
    pub fn evaluation_boundary(&self) -> BoundaryTuple {
        self.consensus.agreed
    }
}

fn sigmas(noise: &NoiseSigma, n: usize) -> Vec<f64> {
    (0..n).map(|i| noise.for_robot(i)).collect()
}

fn place(config: &ScenarioConfig) -> Result<Vec<Point>> {
    match &config.placement {
        Placement::Explicit(ps) => Ok(ps.clone()),
        Placement::Random {
            half_width,
            center,
            min_separation,
        } => {
            let c = center.unwrap_or(config.anchor.start);
            let mut out: Vec<Point> = Vec::with_capacity(config.robots);
            for i in 0..config.robots {
                let mut rng = stream(config.seed, i, Purpose::Placement);
                let mut tries = 0;
                loop {
                    let p = c + Point::new(
                        rng.random_range(-half_width..=*half_width),
                        rng.random_range(-half_width..=*half_width),
                    );
                    if out.iter().all(|q| q.distance(p) >= *min_separation) {
                        out.push(p);
                        break;
                    }
                    tries += 1;
                    if tries == 100_000 {
                        return Err(Error::config("placement.random", format!("could not place robot {i}")));
                    }
                }
            }
            Ok(out)
        }
    }
}

fn orientations(config: &ScenarioConfig) -> Vec<f64> {
    match &config.orientations {
        Orientations::Zero => vec![0.0; config.robots],
        Orientations::Degrees(d) => d.iter().map(|a| normalize_angle(a.to_radians())).collect(),
        Orientations::Random => (0..config.robots)
            .map(|i| normalize_angle(stream(config.seed, i, Purpose::Orientation).random_range(-PI..PI)))
            .collect(),
    }
}

fn agree(config: &ScenarioConfig, proposals: &[BoundaryTuple], graph: &CommGraph, sigmas: &[f64]) -> Result<ConsensusOutcome> {
    let variances: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
    run_consensus(
        proposals,
        &variances,
        graph,
        config.consensus_alpha(graph),
        config.consensus.tolerance,
        config.consensus_max_iters(),
    )
}

/// Placement, frames, boundary proposals and the consensus outcome for the
/// config's seed. The same for every variant.
pub fn prepare(config: &ScenarioConfig) -> Result<TrialSetup> {
    config.validate()?;
    let n = config.robots;
    let initial_positions = place(config)?;
    let headings = orientations(config);
    let frames: Vec<FrameTransform> = (0..n).map(|i| FrameTransform::new(headings[i], initial_positions[i])).collect();
    let sd_r = config.radius_variance.sqrt();
    let proposals = (0..n)
        .map(|i| {
            let z: f64 = stream(config.seed, i, Purpose::RadiusProposal).sample(StandardNormal);
            let radius = (config.boundary_radius + sd_r * z).max(MIN_PROPOSAL_RADIUS);
            let orientation = config.orientation_proposal_deg.map_or(headings[i], f64::to_radians);
            BoundaryTuple::new(radius, orientation)
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = config.graph.build(n)?;
    let consensus = agree(config, &proposals, &graph, &sigmas(&config.anchor.noise_sigma, n))?;
    Ok(TrialSetup {
        initial_positions,
        frames,
        proposals,
        graph,
        consensus,
    })
}

/// One robot's view of a snapshot, in its own frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotView {
    pub frame: FrameTransform,
    pub position: Point,
    pub anchor_estimate: Point,
    pub workspace: ConvexPolygon,
    pub cell: ConvexPolygon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub anchor: Point,
    /// Evaluation workspace, global frame.
    pub workspace: ConvexPolygon,
    pub positions: Vec<Point>,
    /// Voronoi cells of the true positions in the evaluation workspace.
    pub cells: Vec<ConvexPolygon>,
    pub density: DensityField,
    pub robots: Vec<RobotView>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// Global positions.
    pub positions: Vec<Point>,
    pub cost: f64,
    pub regret: f64,
    pub cumulative_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub variant: Variant,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub optimal_cost: f64,
    pub cumulative_regret: f64,
    /// Consensus rounds run by the robots; zero unless the variant uses it.
    pub consensus_iters: usize,
    /// Whether the stopping rule held at the last recorded step.
    pub converged: bool,
    /// First step at which the stopping rule held.
    pub convergence_step: Option<usize>,
    pub boundary: BoundaryTuple,
    pub final_states: Vec<RobotState>,
    pub frames: Vec<FrameTransform>,
    pub snapshots: Vec<Snapshot>,
}

impl TrialResult {
    pub fn final_cost(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.cost)
    }

    pub fn costs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrialOptions {
    pub snapshot_steps: Vec<usize>,
    /// Also snapshot the last recorded step.
    pub snapshot_final: bool,
    /// Reuse a reference cost instead of recomputing it.
    pub optimal_cost: Option<f64>,
}

struct Simulation<'a> {
    config: &'a ScenarioConfig,
    setup: &'a TrialSetup,
    variant: Variant,
    epsilon: f64,
    anchor: AnchorModel,
    noise: Vec<ChaCha12Rng>,
    evaluation: BoundaryTuple,
    states: Vec<RobotState>,
    global: Vec<Point>,
    consensus_iters: usize,
}

struct StepOutcome {
    cost: f64,
    worst_gap: f64,
    /// Per-robot target in the frame the robot moves in.
    targets: Vec<Option<Point>>,
    cells: Vec<ConvexPolygon>,
    workspace: ConvexPolygon,
}

impl<'a> Simulation<'a> {
    fn new(config: &'a ScenarioConfig, setup: &'a TrialSetup, variant: Variant, epsilon: f64) -> Result<Self> {
        let n = config.robots;
        let anchor = AnchorModel::new(
            config.anchor.start,
            config.anchor.velocity,
            sigmas(&config.anchor.noise_sigma, n),
        )?;
        let states = (0..n)
            .map(|i| RobotState {
                id: i,
                position: Point::ORIGIN,
                orientation: setup.frames[i].rotation(),
                anchor_estimate: setup.frames[i].inverse().apply(anchor.position(0.0)),
                anchor_variance: anchor.sigma(i).powi(2),
                boundary: match variant {
                    Variant::Aoc => setup.consensus.states[i],
                    Variant::AocNoConsensus => setup.proposals[i],
                    Variant::Cvt => setup.evaluation_boundary(),
                },
                cell: ConvexPolygon::empty(),
            })
            .collect();
        Ok(Self {
            config,
            setup,
            variant,
            epsilon,
            noise: (0..n).map(|i| stream(config.seed, i, Purpose::AnchorNoise)).collect(),
            anchor,
            evaluation: setup.evaluation_boundary(),
            states,
            global: setup.initial_positions.clone(),
            consensus_iters: if variant == Variant::Aoc {
                setup.consensus.iterations
            } else {
                0
            },
        })
    }

    fn apply_schedule(&mut self, step: usize) -> Result<()> {
        let Some(change) = self.config.anchor.noise_schedule.iter().rev().find(|c| c.step == step) else {
            return Ok(());
        };
        let s = sigmas(&change.noise_sigma, self.config.robots);
        self.anchor.set_sigmas(s.clone())?;
        let outcome = agree(self.config, &self.setup.proposals, &self.setup.graph, &s)?;
        self.evaluation = outcome.agreed;
        if self.variant == Variant::Aoc {
            self.consensus_iters += outcome.iterations;
            for (st, b) in self.states.iter_mut().zip(&outcome.states) {
                st.boundary = *b;
            }
        } else if self.variant == Variant::Cvt {
            for st in &mut self.states {
                st.boundary = outcome.agreed;
            }
        }
        Ok(())
    }

    fn evaluate(&mut self, step: usize) -> Result<StepOutcome> {
        let t = step as f64 * self.config.control.dt;
        let density = &self.config.density;
        let res = self.config.resolution;
        let square = WorkspaceSquare::new(self.anchor.position(t), self.evaluation.radius, self.evaluation.orientation)?;
        let grid = square.grid(res);
        let workspace = square.polygon();
        let partition = global_voronoi(&self.global, &workspace)?;
        let cost = partition
            .cells
            .iter()
            .zip(&self.global)
            .map(|(cell, &p)| grid.cost_about(cell, p, density, t))
            .sum();

        let targets: Vec<Option<Point>> = match self.variant {
            Variant::Cvt => partition
                .cells
                .iter()
                .map(|cell| grid.moments(cell, density, t).centroid())
                .collect(),
            Variant::Aoc | Variant::AocNoConsensus => {
                for (i, st) in self.states.iter_mut().enumerate() {
                    let (mean, var) =
                        sample_anchor_estimate(&mut self.noise[i], &self.anchor, i, &self.setup.frames[i], t);
                    st.anchor_estimate = mean;
                    st.anchor_variance = var;
                }
                let inbox = exchange_reports(&self.states, &self.setup.graph);
                let mut out = Vec::with_capacity(self.states.len());
                for i in 0..self.states.len() {
                    let st = &self.states[i];
                    let cell = anchor_oriented_cell(st, &inbox[i], self.setup.graph.neighbors(i), st.boundary)?;
                    let local_grid = local_workspace(st, st.boundary)?.grid(res);
                    let phi = InFrame::new(density, self.setup.frames[i]);
                    out.push(local_grid.moments(&cell, &phi, t).centroid());
                    self.states[i].cell = cell;
                }
                out
            }
        };
        let worst_gap = targets
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| c.distance(self.moving_position(i))))
            .fold(0.0, f64::max);
        Ok(StepOutcome {
            cost,
            worst_gap,
            targets,
            cells: partition.cells,
            workspace,
        })
    }

    fn moving_position(&self, i: usize) -> Point {
        match self.variant {
            Variant::Cvt => self.global[i],
            _ => self.states[i].position,
        }
    }

    fn advance(&mut self, targets: &[Option<Point>]) {
        let params = &self.config.control;
        for (i, target) in targets.iter().enumerate() {
            // empty or massless cells hold position
            let Some(c) = *target else { continue };
            match self.variant {
                Variant::Cvt => self.global[i] = lloyd_step(self.global[i], c, params),
                _ => {
                    let p = lloyd_step(self.states[i].position, c, params);
                    self.states[i].position = p;
                    self.global[i] = self.setup.frames[i].apply(p);
                }
            }
        }
    }

    fn sync_states(&mut self) {
        if self.variant == Variant::Cvt {
            for (i, st) in self.states.iter_mut().enumerate() {
                st.position = self.setup.frames[i].inverse().apply(self.global[i]);
            }
        }
    }

    fn snapshot(&mut self, step: usize, outcome: &StepOutcome) -> Snapshot {
        self.sync_states();
        let t = step as f64 * self.config.control.dt;
        let anchor = self.anchor.position(t);
        let robots = self
            .states
            .iter()
            .enumerate()
            .map(|(i, st)| {
                let frame = self.setup.frames[i];
                let back = frame.inverse();
                match self.variant {
                    Variant::Cvt => RobotView {
                        frame,
                        position: st.position,
                        anchor_estimate: back.apply(anchor),
                        workspace: outcome.workspace.transformed(&back),
                        cell: outcome.cells[i].transformed(&back),
                    },
                    _ => RobotView {
                        frame,
                        position: st.position,
                        anchor_estimate: st.anchor_estimate,
                        workspace: local_workspace(st, st.boundary).map(|w| w.polygon()).unwrap_or_else(|_| ConvexPolygon::empty()),
                        cell: st.cell.clone(),
                    },
                }
            })
            .collect();
        Snapshot {
            step,
            time: t,
            anchor,
            workspace: outcome.workspace.clone(),
            positions: self.global.clone(),
            cells: outcome.cells.clone(),
            density: self.config.density.frozen_at(t),
            robots,
        }
    }
}

struct RawRun {
    costs: Vec<f64>,
    positions: Vec<Vec<Point>>,
    converged: bool,
    convergence_step: Option<usize>,
    snapshots: Vec<Snapshot>,
    sim_states: Vec<RobotState>,
    consensus_iters: usize,
    evaluation: BoundaryTuple,
}

fn simulate(
    config: &ScenarioConfig,
    setup: &TrialSetup,
    variant: Variant,
    epsilon: f64,
    max_records: usize,
    stop_on_convergence: bool,
    snapshot_steps: &[usize],
    snapshot_final: bool,
) -> Result<RawRun> {
    let mut sim = Simulation::new(config, setup, variant, epsilon)?;
    let mut costs = Vec::new();
    let mut positions = Vec::new();
    let mut snapshots = Vec::new();
    let mut first = None;
    let mut converged = false;
    for step in 0..max_records {
        sim.apply_schedule(step).map_err(|e| e.at_step(step))?;
        let outcome = sim.evaluate(step).map_err(|e| e.at_step(step))?;
        costs.push(outcome.cost);
        positions.push(sim.global.clone());
        converged = outcome.worst_gap <= sim.epsilon;
        let last = step + 1 == max_records || (converged && stop_on_convergence);
        if snapshot_steps.contains(&step) || (snapshot_final && last) {
            snapshots.push(sim.snapshot(step, &outcome));
        }
        if converged {
            first.get_or_insert(step);
            if stop_on_convergence {
                break;
            }
        }
        sim.advance(&outcome.targets);
    }
    sim.sync_states();
    Ok(RawRun {
        costs,
        positions,
        converged,
        convergence_step: first,
        snapshots,
        consensus_iters: sim.consensus_iters,
        evaluation: sim.evaluation,
        sim_states: sim.states,
    })
}

/// Lloyd fixed-point cost from the trial's start: noiseless baseline, inputs
/// frozen at `t = 0`, stopping distance `ε/10`.
pub fn reference_cost(config: &ScenarioConfig, setup: &TrialSetup) -> Result<f64> {
    let frozen = config.frozen();
    let run = simulate(
        &frozen,
        setup,
        Variant::Cvt,
        config.control.epsilon / 10.0,
        REFERENCE_MAX_STEPS,
        true,
        &[],
        false,
    )?;
    if !run.converged {
        return Err(Error::InvalidArgument(format!(
            "reference Lloyd run did not converge within {REFERENCE_MAX_STEPS} steps"
        )));
    }
    Ok(*run.costs.last().unwrap())
}

/// Costs of the noiseless baseline on the frozen scenario, one per step.
pub fn baseline_costs(config: &ScenarioConfig) -> Result<Vec<f64>> {
    let setup = prepare(config)?;
    let frozen = config.frozen();
    Ok(simulate(
        &frozen,
        &setup,
        Variant::Cvt,
        config.control.epsilon,
        config.horizon,
        config.stop_on_convergence,
        &[],
        false,
    )?
    .costs)
}

pub fn run_trial(config: &ScenarioConfig) -> Result<TrialResult> {
    run_trial_with(config, &TrialOptions::default())
}

pub fn run_trial_with(config: &ScenarioConfig, options: &TrialOptions) -> Result<TrialResult> {
    let setup = prepare(config)?;
    run_prepared(config, &setup, options)
}

/// Runs a trial on an existing setup; `setup` must come from `prepare` on
/// the same config.
pub fn run_prepared(config: &ScenarioConfig, setup: &TrialSetup, options: &TrialOptions) -> Result<TrialResult> {
    let optimal_cost = match options.optimal_cost {
        Some(h) => h,
        None => reference_cost(config, setup)?,
    };
    let run = simulate(
        config,
        setup,
        config.variant,
        config.control.epsilon,
        config.horizon,
        config.stop_on_convergence,
        &options.snapshot_steps,
        options.snapshot_final,
    )?;
    let dt = config.control.dt;
    let mut cumulative = 0.0;
    let records = run
        .costs
        .iter()
        .zip(run.positions)
        .enumerate()
        .map(|(step, (&cost, positions))| {
            let regret = cost - optimal_cost;
            cumulative += regret;
            StepRecord {
                step,
                time: step as f64 * dt,
                positions,
                cost,
                regret,
                cumulative_regret: cumulative,
            }
        })
        .collect();
    Ok(TrialResult {
        variant: config.variant,
        seed: config.seed,
        records,
        optimal_cost,
        cumulative_regret: cumulative,
        consensus_iters: run.consensus_iters,
        converged: run.converged,
        convergence_step: run.convergence_step,
        boundary: run.evaluation,
        final_states: run.sim_states,
        frames: setup.frames.clone(),
        snapshots: run.snapshots,
    })
}

