//! Scenario runner: loads scenario documents, runs seeded batches across
//! variants, and writes per-trial CSV metrics and SVG snapshots.

pub mod args;
pub mod batch;
pub mod scenario;
pub mod svg;

pub use batch::{run_batch, BatchError, BatchReport, RunManifest, TrialOutcome};
pub use scenario::{builtin, load_document, load_scenario, parse_scenario, resolve, LoadError, Scenario, SweepPoint};
pub use svg::{render_svg, FrameChoice};
