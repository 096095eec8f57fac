use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blockade::runner::{preset, run_scenario, Outcome, ScenarioConfig, ScenarioKind};
use blockade::{Error, Result};

/// Free-electron / nonlinear-cavity scattering simulator.
#[derive(Parser, Debug)]
#[command(name = "blockade", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run any scenario.
    Run(RunArgs),
    /// Run a sweep or fidelity-map scenario.
    Sweep(RunArgs),
    /// Run the gate identity suite.
    Gates(RunArgs),
    /// Run the feasibility check.
    Check(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario config (JSON).
    config: Option<PathBuf>,
    /// Output directory; overrides output_dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Built-in config instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Worker threads for grid points.
    #[arg(long)]
    workers: Option<usize>,
}

fn load(args: &RunArgs, default_kind: Option<ScenarioKind>) -> Result<ScenarioConfig> {
    match (&args.config, &args.preset) {
        (Some(_), Some(_)) => Err(Error::config("--preset", "give a config file or a preset, not both")),
        (Some(path), None) => ScenarioConfig::from_path(path),
        (None, Some(name)) => preset(name),
        (None, None) => match default_kind {
            Some(kind) => Ok(ScenarioConfig::new(kind)),
            None => Err(Error::config("<config>", "a config file or --preset is required")),
        },
    }
}

fn workers(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return if n == 0 { Err(Error::config("--workers", "must be ≥ 1")) } else { Ok(n) };
    }
    match std::env::var("BLOCKADE_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config("BLOCKADE_WORKERS", format!("`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn summarize(outcome: &Outcome) {
    match outcome {
        Outcome::Single(d) => {
            println!("most probable level: {}", d.stats.mode());
            if let Some(f) = d.fidelity {
                println!("fidelity: {f:.6}");
            }
        }
        Outcome::Sweep(s) => {
            let ok = s.points.iter().filter(|p| p.converged()).count();
            println!("{ok}/{} points converged", s.points.len());
        }
        Outcome::FidelityMaps(maps) => {
            for m in maps {
                let ok = m.entries.iter().filter(|e| e.result.is_ok()).count();
                println!("{} ({}): {ok}/{} points converged", m.model, m.target, m.entries.len());
            }
        }
        Outcome::Gates(suite) => print!("{suite}"),
        Outcome::Feasibility(r) => print!("{r}"),
    }
}

fn run(command: Command) -> Result<()> {
    let (args, expected) = match command {
        Command::Run(a) => (a, None),
        Command::Sweep(a) => (a, Some(ScenarioKind::SweepGq)),
        Command::Gates(a) => (a, Some(ScenarioKind::Gates)),
        Command::Check(a) => (a, Some(ScenarioKind::Feasibility)),
    };
    let cfg = load(&args, expected)?;
    let fits = match expected {
        None => true,
        Some(ScenarioKind::SweepGq) => cfg.scenario.is_sweep() || cfg.scenario == ScenarioKind::FidelityMap,
        Some(kind) => cfg.scenario == kind,
    };
    if !fits {
        return Err(Error::config("scenario", format!("{:?} does not match this subcommand", cfg.scenario)));
    }
    let workers = workers(args.workers)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    log::info!("scenario {:?} with {workers} workers into {}", cfg.scenario, out.display());
    let outcome = run_scenario(&cfg, &out, workers);
    match &outcome {
        Ok(o) => summarize(o),
        Err(Error::GateIdentity(_)) => {
            if let Ok(text) = std::fs::read_to_string(out.join("gates_report.txt")) {
                print!("{text}");
            }
        }
        Err(_) => {}
    }
    outcome.map(|_| ())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
