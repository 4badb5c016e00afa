//! Batch execution of scenario × variant × seed grids, with CSV and SVG
//! output.

use crate::scenario::{Scenario, SweepPoint};
use crate::svg::{render_svg, FrameChoice};
use aoc_core::sim::{prepare, reference_cost, run_prepared, ScenarioConfig, TrialOptions, TrialResult, TrialSetup, Variant};
use rayon::prelude::*;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("{0}")]
    Manifest(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BatchError + '_ {
    move |source| BatchError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl From<csv::Error> for BatchError {
    fn from(e: csv::Error) -> Self {
        BatchError::Io {
            path: String::from("csv output"),
            source: io::Error::other(e.to_string()),
        }
    }
}

/// What to run and where to write it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub snapshot_steps: Vec<usize>,
    pub snapshot_final: bool,
    pub frame: FrameChoice,
}

impl RunManifest {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunManifest {
            variants: Variant::ALL.to_vec(),
            seeds: vec![0],
            out_dir: out_dir.into(),
            snapshot_steps: Vec::new(),
            snapshot_final: false,
            frame: FrameChoice::Global,
        }
    }

    /// `count` consecutive seeds starting at `base`.
    pub fn seeds_from(mut self, base: u64, count: usize) -> Self {
        self.seeds = (0..count as u64).map(|k| base.wrapping_add(k)).collect();
        self
    }

    fn check(&self, scenario: &Scenario) -> Result<(), BatchError> {
        if self.variants.is_empty() {
            return Err(BatchError::Manifest("no variants selected".into()));
        }
        if self.seeds.is_empty() {
            return Err(BatchError::Manifest("no seeds selected".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(BatchError::Manifest("seeds must be distinct".into()));
        }
        if let FrameChoice::Robot(id) = self.frame {
            for p in &scenario.points {
                if id >= p.config.robots {
                    return Err(BatchError::Manifest(format!(
                        "frame robot:{id} does not exist; scenario has {} robots",
                        p.config.robots
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One finished (or failed) trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub point: usize,
    pub variant: Variant,
    pub seed: u64,
    pub result: Result<TrialResult, String>,
}

#[derive(Debug)]
pub struct BatchReport {
    pub scenario: String,
    /// Ordered by point, variant, seed.
    pub trials: Vec<TrialOutcome>,
}

impl BatchReport {
    pub fn failed(&self) -> usize {
        self.trials.iter().filter(|t| t.result.is_err()).count()
    }

    pub fn results_for(&self, point: usize, variant: Variant) -> impl Iterator<Item = &TrialResult> {
        self.trials
            .iter()
            .filter(move |t| t.point == point && t.variant == variant)
            .filter_map(|t| t.result.as_ref().ok())
    }
}

fn point_dir(out: &Path, point: &SweepPoint) -> PathBuf {
    match &point.label {
        Some(label) => out.join(label.replace(['/', '\\'], "_")),
        None => out.to_path_buf(),
    }
}

pub fn trial_csv_path(out: &Path, point: &SweepPoint, variant: Variant, seed: u64) -> PathBuf {
    point_dir(out, point).join(variant.as_str()).join(format!("seed-{seed}.csv"))
}

/// Config with the trial seed, its setup, and the reference cost.
type Prepared = Result<(ScenarioConfig, TrialSetup, f64), String>;

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs every (point, variant, seed) cell and writes the output tree.
///
/// A failing trial marks its cell failed in the summaries; the other cells
/// still run.
pub fn run_batch(scenario: &Scenario, manifest: &RunManifest) -> Result<BatchReport, BatchError> {
    manifest.check(scenario)?;

    let prepared: Vec<(usize, u64, Prepared)> = scenario
        .points
        .iter()
        .enumerate()
        .flat_map(|(p, _)| manifest.seeds.iter().map(move |&s| (p, s)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(p, seed)| {
            let mut config = scenario.points[p].config.clone();
            config.seed = seed;
            let res = prepare(&config)
                .and_then(|setup| reference_cost(&config, &setup).map(|h| (config, setup, h)))
                .map_err(|e| e.to_string());
            (p, seed, res)
        })
        .collect();

    let mut jobs = Vec::new();
    for (p, seed, res) in &prepared {
        for &variant in &manifest.variants {
            jobs.push((*p, *seed, variant, res));
        }
    }
    let trials: Vec<TrialOutcome> = jobs
        .into_par_iter()
        .map(|(point, seed, variant, res)| {
            let result = match res {
                Err(e) => Err(e.clone()),
                Ok((config, setup, h)) => {
                    let mut config = config.clone();
                    config.variant = variant;
                    let options = TrialOptions {
                        snapshot_steps: manifest.snapshot_steps.clone(),
                        snapshot_final: manifest.snapshot_final,
                        optimal_cost: Some(*h),
                    };
                    run_prepared(&config, setup, &options).map_err(|e| e.to_string())
                }
            };
            TrialOutcome {
                point,
                variant,
                seed,
                result,
            }
        })
        .collect();

    let mut trials = trials;
    let variant_rank = |v: Variant| manifest.variants.iter().position(|&w| w == v).unwrap();
    let seed_rank = |s: u64| manifest.seeds.iter().position(|&w| w == s).unwrap();
    trials.sort_by_key(|t| (t.point, variant_rank(t.variant), seed_rank(t.seed)));

    let report = BatchReport {
        scenario: scenario.name.clone(),
        trials,
    };
    write_outputs(scenario, manifest, &report)?;
    Ok(report)
}

fn write_outputs(scenario: &Scenario, manifest: &RunManifest, report: &BatchReport) -> Result<(), BatchError> {
    let out = &manifest.out_dir;
    for (p, point) in scenario.points.iter().enumerate() {
        let dir = point_dir(out, point);
        for &variant in &manifest.variants {
            let vdir = dir.join(variant.as_str());
            fs::create_dir_all(&vdir).map_err(io_err(&vdir))?;
        }
        for t in report.trials.iter().filter(|t| t.point == p) {
            if let Ok(r) = &t.result {
                write_trial_csv(&trial_csv_path(out, point, t.variant, t.seed), r)?;
                for snap in &r.snapshots {
                    let path = dir
                        .join(t.variant.as_str())
                        .join(format!("seed-{}-step-{:06}-{}.svg", t.seed, snap.step, manifest.frame.tag()));
                    fs::write(&path, render_svg(snap, manifest.frame)).map_err(io_err(&path))?;
                }
            }
        }
        write_summary(&dir.join("summary.csv"), report, p)?;
        write_aggregate(&dir.join("aggregate.csv"), report, p, &manifest.variants)?;
    }
    if scenario.is_sweep() {
        write_sweep_summary(&out.join("sweep_summary.csv"), scenario, report, &manifest.variants)?;
    }
    Ok(())
}

pub fn write_trial_csv(path: &Path, r: &TrialResult) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BatchError::Io {
        path: path.display().to_string(),
        source: io::Error::other(e.to_string()),
    })?;
    w.write_record([
        "step",
        "time_s",
        "robot_id",
        "x_m",
        "y_m",
        "cost_H",
        "regret_r",
        "cum_regret_R",
        "consensus_iters",
        "variant",
        "seed",
    ])?;
    let iters = r.consensus_iters.to_string();
    let seed = r.seed.to_string();
    for rec in &r.records {
        let (step, time, cost, regret, cum) = (rec.step.to_string(), f(rec.time), f(rec.cost), f(rec.regret), f(rec.cumulative_regret));
        for (i, p) in rec.positions.iter().enumerate() {
            w.write_record([
                step.as_str(),
                &time,
                &i.to_string(),
                &f(p.x),
                &f(p.y),
                &cost,
                &regret,
                &cum,
                &iters,
                r.variant.as_str(),
                &seed,
            ])?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_summary(path: &Path, report: &BatchReport, point: usize) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "seed",
        "status",
        "steps",
        "final_cost_H",
        "optimal_cost_H_star",
        "cum_regret_R",
        "consensus_iters",
        "converged",
        "convergence_step",
        "error",
    ])?;
    for t in report.trials.iter().filter(|t| t.point == point) {
        let row: Vec<String> = match &t.result {
            Ok(r) => vec![
                t.variant.to_string(),
                t.seed.to_string(),
                "ok".into(),
                r.records.len().to_string(),
                f(r.final_cost()),
                f(r.optimal_cost),
                f(r.cumulative_regret),
                r.consensus_iters.to_string(),
                r.converged.to_string(),
                r.convergence_step.map(|s| s.to_string()).unwrap_or_default(),
                String::new(),
            ],
            Err(e) => vec![
                t.variant.to_string(),
                t.seed.to_string(),
                "failed".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ],
        };
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Mean and sample standard deviation; zero spread for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per variant and step: statistics over the trials that recorded that step.
/// Trials that stopped early on convergence drop out of later rows.
fn write_aggregate(path: &Path, report: &BatchReport, point: usize, variants: &[Variant]) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "step",
        "trials",
        "failed",
        "mean_cost_H",
        "std_cost_H",
        "mean_regret_r",
        "std_regret_r",
        "mean_cum_regret_R",
        "std_cum_regret_R",
    ])?;
    for &variant in variants {
        let ok: Vec<&TrialResult> = report.results_for(point, variant).collect();
        let failed = report
            .trials
            .iter()
            .filter(|t| t.point == point && t.variant == variant && t.result.is_err())
            .count();
        let steps = ok.iter().map(|r| r.records.len()).max().unwrap_or(0);
        for k in 0..steps {
            let recs: Vec<_> = ok.iter().filter_map(|r| r.records.get(k)).collect();
            let (hc, hs) = mean_std(&recs.iter().map(|r| r.cost).collect::<Vec<_>>());
            let (rc, rs) = mean_std(&recs.iter().map(|r| r.regret).collect::<Vec<_>>());
            let (cc, cs) = mean_std(&recs.iter().map(|r| r.cumulative_regret).collect::<Vec<_>>());
            w.write_record([
                variant.as_str(),
                &k.to_string(),
                &recs.len().to_string(),
                &failed.to_string(),
                &f(hc),
                &f(hs),
                &f(rc),
                &f(rs),
                &f(cc),
                &f(cs),
            ])?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_sweep_summary(path: &Path, scenario: &Scenario, report: &BatchReport, variants: &[Variant]) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "point",
        "variant",
        "trials",
        "failed",
        "mean_final_cost_H",
        "std_final_cost_H",
        "mean_cum_regret_R",
        "std_cum_regret_R",
    ])?;
    for (p, point) in scenario.points.iter().enumerate() {
        for &variant in variants {
            let ok: Vec<&TrialResult> = report.results_for(p, variant).collect();
            let failed = report
                .trials
                .iter()
                .filter(|t| t.point == p && t.variant == variant && t.result.is_err())
                .count();
            let (hc, hs) = mean_std(&ok.iter().map(|r| r.final_cost()).collect::<Vec<_>>());
            let (rc, rs) = mean_std(&ok.iter().map(|r| r.cumulative_regret).collect::<Vec<_>>());
            w.write_record([
                point.label.as_deref().unwrap_or(""),
                variant.as_str(),
                &ok.len().to_string(),
                &failed.to_string(),
                &f(hc),
                &f(hs),
                &f(rc),
                &f(rs),
            ])?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
