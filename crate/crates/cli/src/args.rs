//! Command-line interface definition and value parsers.

use crate::svg::FrameChoice;
use aoc_core::sim::Variant;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "aoc", version, about = "Run anchor-oriented coverage scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in scenario or a scenario file.
    Run(RunArgs),
    /// List the built-in scenarios.
    ListScenarios,
    /// Check a scenario file without running it.
    Validate {
        path: PathBuf,
    },
    /// Print a built-in scenario's JSON.
    Show {
        name: String,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Built-in scenario name or path to a JSON file.
    pub scenario: String,
    /// Comma-separated variants: cvt, aoc, aoc-no-consensus.
    #[arg(long, value_parser = parse_variants, default_value = "cvt,aoc,aoc-no-consensus")]
    pub variants: VariantList,
    /// Number of seeds.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=100_000))]
    pub seeds: u32,
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated steps to render as SVG; `end` is the last step.
    #[arg(long, value_parser = parse_snapshots)]
    pub snapshots: Option<Snapshots>,
    /// `global` or `robot:<id>`.
    #[arg(long, value_parser = parse_frame, default_value = "global")]
    pub frame: FrameChoice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantList(pub Vec<Variant>);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Snapshots {
    pub steps: Vec<usize>,
    pub end: bool,
}

pub fn parse_variants(s: &str) -> Result<VariantList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let v: Variant = part.parse().map_err(|e| format!("{e}"))?;
        if out.contains(&v) {
            return Err(format!("variant `{part}` listed twice"));
        }
        out.push(v);
    }
    Ok(VariantList(out))
}

pub fn parse_snapshots(s: &str) -> Result<Snapshots, String> {
    let mut out = Snapshots::default();
    for part in s.split(',').map(str::trim) {
        if part == "end" {
            out.end = true;
        } else {
            let k: usize = part.parse().map_err(|_| format!("`{part}` is not a step number or `end`"))?;
            out.steps.push(k);
        }
    }
    out.steps.sort_unstable();
    out.steps.dedup();
    Ok(out)
}

pub fn parse_frame(s: &str) -> Result<FrameChoice, String> {
    if s == "global" {
        return Ok(FrameChoice::Global);
    }
    match s.strip_prefix("robot:") {
        Some(id) => id
            .parse()
            .map(FrameChoice::Robot)
            .map_err(|_| format!("`{id}` is not a robot id")),
        None => Err(format!("frame must be `global` or `robot:<id>`, got `{s}`")),
    }
}
