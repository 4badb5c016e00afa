//! Deterministic multi-robot coverage simulation.

mod config;
mod engine;
pub mod rng;
mod state;

pub use config::{
    AnchorConfig, ConsensusConfig, GraphSpec, NoiseChange, NoiseSigma, Orientations, Placement, ScenarioConfig, Variant,
};
pub use engine::{
    baseline_costs, prepare, reference_cost, run_prepared, run_trial, run_trial_with, RobotView, Snapshot, StepRecord,
    TrialOptions, TrialResult, TrialSetup, MIN_PROPOSAL_RADIUS, REFERENCE_MAX_STEPS,
};
pub use state::{exchange_reports, sample_anchor_estimate, AnchorModel, RobotState};
