//! Acceptance suite: every criterion runs, prints one PASS/FAIL line, and the
//! test fails at the end if any criterion failed.

use aoc_cli::scenario::{builtin, builtin_names};
use aoc_cli::{run_batch, FrameChoice, RunManifest, Scenario};
use aoc_core::consensus::{consensus_step, run_consensus, spread, BoundaryTuple, CommGraph};
use aoc_core::density::{Density, DensityField};
use aoc_core::geometry::{build_workspace_square, weighted_centroid_mass, ConvexPolygon, Point};
use aoc_core::metrics::{growth_ratio, locational_cost, partition_difference, regret_noise_check, NoiseLevel};
use aoc_core::partition::{brute_force_partition, global_voronoi, PartitionFrame, PartitionResult};
use aoc_core::sim::{
    baseline_costs, prepare, reference_cost, run_prepared, ScenarioConfig, TrialOptions, TrialResult, Variant,
};
use aoc_oracle::{consensus_matrix_limit, mc_locational_cost, mc_weighted_centroid, OracleBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn point(name: &str) -> ScenarioConfig {
    builtin(name).unwrap().points[0].config.clone()
}

/// Runs the given variants on one seed, sharing the setup and reference cost.
fn trials(config: &ScenarioConfig, seed: u64, variants: &[Variant], options: &TrialOptions) -> Vec<TrialResult> {
    let mut config = config.clone();
    config.seed = seed;
    let setup = prepare(&config).unwrap();
    let h_star = reference_cost(&config, &setup).unwrap();
    variants
        .iter()
        .map(|&v| {
            let mut c = config.clone();
            c.variant = v;
            let opts = TrialOptions { optimal_cost: Some(h_star), ..options.clone() };
            run_prepared(&c, &setup, &opts).unwrap()
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn c1_equivalence() -> Check {
    let config = point("orientation-4x4");
    let opts = TrialOptions { snapshot_steps: vec![0, 1, 5, 20], snapshot_final: true, ..Default::default() };
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let r = trials(&config, seed, &[Variant::Aoc, Variant::Cvt], &opts);
        let (aoc, cvt) = (&r[0], &r[1]);
        ensure(aoc.records.len() == cvt.records.len(), || format!("seed {seed}: run lengths differ"))?;
        ensure(aoc.snapshots.len() == cvt.snapshots.len(), || format!("seed {seed}: snapshot counts differ"))?;
        for (sa, sc) in aoc.snapshots.iter().zip(&cvt.snapshots) {
            let local = PartitionResult {
                cells: sa.robots.iter().map(|v| v.cell.clone()).collect(),
                frame: PartitionFrame::Local(0),
            };
            let frames: Vec<_> = sa.robots.iter().map(|v| v.frame).collect();
            let area = sc.workspace.area();
            for reference in [&sc.cells, &sa.cells] {
                let global = PartitionResult { cells: reference.clone(), frame: PartitionFrame::Global };
                let d = partition_difference(&local, &global, &frames).unwrap() / area;
                worst = worst.max(d);
            }
        }
    }
    ensure(worst <= 1e-6, || format!("max symmetric difference {worst:.3e} of workspace area"))?;
    Ok(format!("max symmetric difference {worst:.2e} of workspace area over 10 seeds"))
}

fn c2_parity() -> Check {
    let mut notes = Vec::new();
    for name in ["small-4x4", "large-10x10"] {
        let config = point(name);
        let (mut aoc, mut cvt) = (Vec::new(), Vec::new());
        for seed in 0..10 {
            let r = trials(&config, seed, &[Variant::Aoc, Variant::Cvt], &TrialOptions::default());
            aoc.push(r[0].final_cost());
            cvt.push(r[1].final_cost());
        }
        let gap = (mean(&aoc) - mean(&cvt)).abs() / mean(&cvt);
        ensure(gap <= 0.05, || format!("{name}: aoc {:.5} vs cvt {:.5} ({:.2}%)", mean(&aoc), mean(&cvt), 100.0 * gap))?;
        notes.push(format!("{name} {:.2}%", 100.0 * gap));
    }
    Ok(format!("relative gap {}", notes.join(", ")))
}

fn c3_ablation() -> Check {
    let config = point("small-4x4");
    ensure(config.radius_variance == 1.0, || "small scenario no longer has unit radius variance".into())?;
    let (mut with, mut without) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let r = trials(&config, seed, &[Variant::Aoc, Variant::AocNoConsensus], &TrialOptions::default());
        with.push(r[0].final_cost());
        without.push(r[1].final_cost());
    }
    let ratio = mean(&without) / mean(&with);
    ensure(ratio >= 1.05, || format!("no-consensus/aoc = {ratio:.4}"))?;
    Ok(format!("no-consensus/aoc mean final cost = {ratio:.3}"))
}

fn c4_descent() -> Check {
    let mut checked = 0;
    let mut worst_rise = f64::NEG_INFINITY;
    for name in builtin_names() {
        for p in builtin(name).unwrap().points {
            let costs = baseline_costs(&p.config).unwrap();
            for (k, w) in costs.windows(2).enumerate() {
                worst_rise = worst_rise.max(w[1] - w[0]);
                ensure(w[1] <= w[0] + 1e-9, || {
                    format!("{name} {:?}: cost rose by {:.3e} at step {}", p.label, w[1] - w[0], k + 1)
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} scenario points, largest step change {worst_rise:.2e}"))
}

fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> CommGraph {
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

fn c5_consensus() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=12);
        let g = random_connected(&mut rng, n);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
        let thetas: Vec<f64> = (0..n).map(|_| rng.random_range(-1.2..1.2)).collect();
        let variances: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let proposals: Vec<BoundaryTuple> =
            radii.iter().zip(&thetas).map(|(&r, &t)| BoundaryTuple::new(r, t).unwrap()).collect();
        let alpha = g.default_alpha();
        let out = run_consensus(&proposals, &variances, &g, alpha, 1e-9, 1_000_000).unwrap();
        ensure(out.trace.windows(2).all(|w| w[1] <= w[0]), || format!("spread rose on a graph of {n}"))?;
        // Stepwise too, with the shortest-arc update.
        let mut states = proposals.clone();
        let mut s = spread(&states);
        for _ in 0..200 {
            states = consensus_step(&states, &variances, &g, alpha).unwrap();
            let next = spread(&states);
            ensure(next <= s + 1e-15, || format!("stepwise spread rose from {s} to {next}"))?;
            s = next;
        }
        let adj: Vec<Vec<usize>> = (0..n).map(|i| g.neighbors(i).to_vec()).collect();
        let r_lim = consensus_matrix_limit(&radii, &variances, &adj, alpha).unwrap();
        let t_lim = consensus_matrix_limit(&thetas, &variances, &adj, alpha).unwrap();
        worst = worst.max((out.agreed.radius - r_lim).abs()).max((out.agreed.orientation - t_lim).abs());
    }
    ensure(worst <= 1e-6, || format!("limit differs from the matrix oracle by {worst:.3e}"))?;
    let same = vec![BoundaryTuple::new(2.5, -0.7).unwrap(); 6];
    let vars = [0.1, 0.5, 1.0, 0.2, 0.3, 0.9];
    for g in [CommGraph::complete(6), CommGraph::path(6), CommGraph::ring(6)] {
        let next = consensus_step(&same, &vars, &g, g.default_alpha()).unwrap();
        ensure(next == same, || "identical proposals moved".into())?;
        let out = run_consensus(&same, &vars, &g, g.default_alpha(), 1e-6, 10).unwrap();
        ensure(out.agreed == same[0] && out.states == same, || "identical proposals did not agree exactly".into())?;
    }
    Ok(format!("50 random graphs, max oracle gap {worst:.2e}; fixed point exact"))
}

fn c6_scalability() -> Check {
    let scenario = builtin("scalability-50x50").unwrap();
    let mut means = Vec::new();
    for p in &scenario.points {
        let costs: Vec<f64> = (0..5).map(|seed| trials(&p.config, seed, &[Variant::Aoc], &TrialOptions::default())[0].final_cost()).collect();
        means.push((p.config.robots, mean(&costs)));
    }
    let listing = means.iter().map(|(n, h)| format!("N={n}: {h:.0}")).collect::<Vec<_>>().join(", ");
    ensure(means.windows(2).all(|w| w[1].1 < w[0].1), || format!("not strictly decreasing: {listing}"))?;
    Ok(listing)
}

fn c7_noise() -> Check {
    let scenario = builtin("noise-sweep").unwrap();
    let t = 60;
    let seeds: Vec<u64> = (0..10).collect();
    // The growth window starts past the noiseless transient.
    let mut t_eff = t;
    for &seed in &seeds {
        let mut c = scenario.points[0].config.clone();
        c.seed = seed;
        c.stop_on_convergence = true;
        c.horizon = 20_000;
        let steps = baseline_costs(&c).unwrap().len() - 1;
        t_eff = t_eff.max(steps);
    }
    let mut levels = Vec::new();
    let mut ratios = Vec::new();
    for p in &scenario.points {
        let sigma = p.config.anchor.noise_sigma.for_robot(0);
        let mut at_t = Vec::new();
        let (mut r_t, mut r_2t) = (0.0, 0.0);
        for &seed in &seeds {
            let mut c = p.config.clone();
            c.horizon = 2 * t_eff;
            c.stop_on_convergence = false;
            let r = &trials(&c, seed, &[Variant::Aoc], &TrialOptions::default())[0];
            let regret: Vec<f64> = r.records.iter().map(|x| x.regret).collect();
            at_t.push(regret[..t].iter().sum::<f64>());
            r_t += regret[..t_eff].iter().sum::<f64>();
            r_2t += regret[..2 * t_eff].iter().sum::<f64>();
            growth_ratio(&regret, t_eff).unwrap();
        }
        levels.push(NoiseLevel { sigma, horizon: t, cumulative_regret: at_t });
        ratios.push((sigma, r_2t / r_t));
    }
    let report = regret_noise_check(&levels).unwrap();
    let means = report.means.iter().map(|(s, r)| format!("{s}:{r:.0}")).collect::<Vec<_>>().join(" ");
    let growth = ratios.iter().map(|(s, g)| format!("{s}:{g:.3}")).collect::<Vec<_>>().join(" ");
    ensure(report.non_decreasing, || format!("mean R(60) not non-decreasing: {means}"))?;
    ensure(ratios.iter().all(|(_, g)| *g < 2.0), || format!("R(2T)/R(T) at T={t_eff}: {growth}"))?;
    Ok(format!("mean R(60) {means}; R(2T)/R(T) at T={t_eff}: {growth}"))
}

fn c8_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let ws = build_workspace_square(Point::ORIGIN, 1.0, 0.0).unwrap();
    let phi = DensityField::gaussian(0.01, 1.0, 0.4, Point::new(0.3, -0.2)).unwrap();
    let mut worst_centroid = 0.0f64;
    let mut worst_agreement = 1.0f64;
    for case in 0..5u64 {
        let sites: Vec<Point> =
            (0..6).map(|_| Point::new(rng.random_range(-0.95..0.95), rng.random_range(-0.95..0.95))).collect();
        let part = global_voronoi(&sites, &ws).unwrap();
        for cell in &part.cells {
            let (c, _) = weighted_centroid_mass(cell, &phi, 0.0, 512).unwrap();
            let verts: Vec<(f64, f64)> = cell.vertices().iter().map(|&p| p.into()).collect();
            let mc = mc_weighted_centroid(&verts, |x, y| phi.eval(Point::new(x, y), 0.0), OracleBudget::new(1_000_000, case).unwrap())
                .unwrap();
            let (dx, dy) = ((c.x - mc.centroid.0).abs(), (c.y - mc.centroid.1).abs());
            ensure(dx <= 1e-3f64.max(3.0 * mc.std_error.0) && dy <= 1e-3f64.max(3.0 * mc.std_error.1), || {
                format!("centroid {c:?} vs Monte-Carlo {:?}", mc.centroid)
            })?;
            worst_centroid = worst_centroid.max(dx).max(dy);
        }
        let grid = brute_force_partition(&sites, &ws, 512);
        let (mut agree, mut total) = (0usize, 0usize);
        for (row, col, label) in grid.cells() {
            let Some(label) = label else { continue };
            total += 1;
            if part.cells[label].contains(Point::from(grid.center(row, col))) {
                agree += 1;
            }
        }
        let fraction = agree as f64 / total as f64;
        worst_agreement = worst_agreement.min(fraction);
        ensure(fraction >= 0.999, || format!("grid agreement {fraction}"))?;
    }

    let sites = [Point::new(-0.6, -0.2), Point::new(0.5, -0.7), Point::new(0.1, 0.6), Point::new(0.7, 0.3)];
    let part = global_voronoi(&sites, &ws).unwrap();
    let h = locational_cost(&sites, &part, &phi, 0.0, 512).unwrap();
    let s: Vec<(f64, f64)> = sites.iter().map(|&p| p.into()).collect();
    let w: Vec<(f64, f64)> = ws.vertices().iter().map(|&p| p.into()).collect();
    let (mc, _) = mc_locational_cost(&s, &w, |x, y| phi.eval(Point::new(x, y), 0.0), OracleBudget::new(4_000_000, 3).unwrap()).unwrap();
    let cost_gap = (h - mc).abs() / mc;
    ensure(cost_gap <= 1e-3, || format!("locational cost {h} vs Monte-Carlo {mc}"))?;

    let unit = ConvexPolygon::rectangle(-0.5, -0.5, 0.5, 0.5).unwrap();
    let lone = global_voronoi(&[Point::ORIGIN], &unit).unwrap();
    let h1 = locational_cost(&[Point::ORIGIN], &lone, &DensityField::uniform(1.0), 0.0, 256).unwrap();
    ensure((h1 - 1.0 / 12.0).abs() <= 1e-4, || format!("unit-square cost {h1}"))?;
    Ok(format!(
        "centroid gap {worst_centroid:.1e}, grid agreement {:.4}%, cost gap {cost_gap:.1e}, unit square {h1:.8}",
        100.0 * worst_agreement
    ))
}

fn svg_count(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .map(|it| it.filter_map(|e| e.ok()).filter(|e| e.path().extension().is_some_and(|x| x == "svg")).count())
        .unwrap_or(0)
}

fn c9_dynamic() -> Check {
    let out = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let scenario = builtin(name).unwrap();
        let horizon = scenario.points[0].config.horizon;
        let mut m = RunManifest::new(out.path().join(name)).seeds_from(0, 1);
        m.variants = vec![Variant::Aoc];
        m.snapshot_steps = (0..horizon).step_by(horizon / 8).collect();
        m.snapshot_final = true;
        let report = run_batch(&scenario, &m).unwrap();
        let r = report.trials[0].result.clone().unwrap();
        (r, svg_count(&out.path().join(name).join("aoc")))
    };

    let (anchor, anchor_svgs) = run("moving-anchor");
    let h_star = anchor.optimal_cost;
    let cutoff = anchor.records.len() / 4;
    let worst = anchor.records[cutoff..].iter().map(|r| r.cost).fold(0.0, f64::max);
    ensure(worst <= 2.0 * h_star, || format!("moving anchor: max cost {worst:.5} vs H* {h_star:.5}"))?;

    let (density, density_svgs) = run("moving-density");
    let config = point("moving-density");
    let last = density.records.last().unwrap();
    let n = last.positions.len() as f64;
    let centre = last.positions.iter().fold(Point::ORIGIN, |a, &p| a + p * (1.0 / n));
    let source = config.density.center(last.time).unwrap();
    let lag = centre.distance(source);
    let half_width = density.boundary.radius;
    ensure(lag <= half_width, || format!("moving density: lag {lag:.3} m exceeds half-width {half_width:.3} m"))?;
    ensure(anchor_svgs >= 9 && density_svgs >= 9, || format!("svg sequences of {anchor_svgs} and {density_svgs} frames"))?;
    Ok(format!(
        "anchor max H/H* {:.3}; density lag {lag:.2} m of {half_width:.2} m; {anchor_svgs}+{density_svgs} SVG frames",
        worst / h_star
    ))
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn c10_determinism() -> Check {
    let mut files = 0;
    for (k, name) in builtin_names().enumerate() {
        let scenario: Scenario = builtin(name).unwrap();
        let manifest = |dir: &Path| {
            let mut m = RunManifest::new(dir).seeds_from(0, 1);
            m.snapshot_steps = vec![0, 10];
            m.snapshot_final = true;
            m.frame = if k % 2 == 0 { FrameChoice::Global } else { FrameChoice::Robot(0) };
            m
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_batch(&scenario, &manifest(a.path())).unwrap();
        run_batch(&scenario, &manifest(b.path())).unwrap();
        let (ta, tb) = (tree(a.path()), tree(b.path()));
        ensure(ta.keys().eq(tb.keys()), || format!("{name}: different file sets"))?;
        for (path, bytes) in &ta {
            ensure(*bytes == tb[path], || format!("{name}: {path} differs"))?;
        }
        ensure(ta.keys().any(|p| p.ends_with(".svg")) && ta.keys().any(|p| p.ends_with(".csv")), || {
            format!("{name}: missing CSV or SVG output")
        })?;
        files += ta.len();
    }
    Ok(format!("{files} files byte-identical across two runs of every built-in"))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, &'static str, Option<Duration>, fn() -> Check);
    let criteria: [Criterion; 10] = [
        ("1", "frame-free partition equivalence", Some(Duration::from_secs(5)), c1_equivalence),
        ("2", "cost parity with the baseline", Some(Duration::from_secs(30)), c2_parity),
        ("3", "consensus ablation", None, c3_ablation),
        ("4", "baseline descent", None, c4_descent),
        ("5", "consensus", None, c5_consensus),
        ("6", "scalability trend", Some(Duration::from_secs(300)), c6_scalability),
        ("7", "noise trend", None, c7_noise),
        ("8", "oracle suite", None, c8_oracles),
        ("9", "dynamic scenarios", None, c9_dynamic),
        ("10", "determinism", None, c10_determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {:.1} s, limit {} s", elapsed.as_secs_f64(), l.as_secs())),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed.push(id);
                ("FAIL", detail)
            }
        };
        // Written to the handle directly so the line survives output capture.
        let line = format!("{tag} criterion {id:>2} {name}: {detail} ({:.1} s)\n", elapsed.as_secs_f64());
        std::io::stderr().write_all(line.as_bytes()).unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
