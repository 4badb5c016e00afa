use aoc_cli::args::{Cli, Command, RunArgs};
use aoc_cli::scenario::{builtin, builtin_names, load_document, resolve, BUILTINS};
use aoc_cli::{run_batch, RunManifest};
use clap::Parser;
use std::process::ExitCode;

fn run(args: RunArgs) -> Result<ExitCode, String> {
    let scenario = resolve(&args.scenario).map_err(|e| e.to_string())?;
    let snapshots = args.snapshots.unwrap_or_default();
    let manifest = RunManifest {
        variants: args.variants.0,
        seeds: Vec::new(),
        out_dir: args.out.clone(),
        snapshot_steps: snapshots.steps,
        snapshot_final: snapshots.end,
        frame: args.frame,
    }
    .seeds_from(args.base_seed, args.seeds as usize);
    let report = run_batch(&scenario, &manifest).map_err(|e| e.to_string())?;
    for t in &report.trials {
        let point = scenario.points[t.point].label.as_deref().unwrap_or(&scenario.name);
        match &t.result {
            Ok(r) => println!(
                "{point} {} seed {}: H={:.6e} R={:.6e} steps={}",
                t.variant,
                t.seed,
                r.final_cost(),
                r.cumulative_regret,
                r.records.len()
            ),
            Err(e) => eprintln!("{point} {} seed {}: failed: {e}", t.variant, t.seed),
        }
    }
    println!("wrote {}", args.out.display());
    Ok(if report.failed() > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::ListScenarios => {
            for name in builtin_names() {
                let s = builtin(name).expect("built-in");
                println!("{name:20} {}", s.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { path } => load_document(&path).map(|s| {
            println!("{}: ok ({} point{})", path.display(), s.points.len(), if s.points.len() == 1 { "" } else { "s" });
            ExitCode::SUCCESS
        }).map_err(|e| e.to_string()),
        Command::Show { name } => match BUILTINS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => {
                print!("{text}");
                Ok(ExitCode::SUCCESS)
            }
            None => Err(format!("no built-in scenario named `{name}`")),
        },
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
