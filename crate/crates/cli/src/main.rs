use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pidcert_cli::{experiments, CliError, CliResult, ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Sweep,
    Stability,
    Windup,
    Montecarlo,
    Tune,
    Benchmark,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Sweep => ExperimentKind::Sweep,
            Command::Stability => ExperimentKind::Stability,
            Command::Windup => ExperimentKind::Windup,
            Command::Montecarlo => ExperimentKind::Montecarlo,
            Command::Tune => ExperimentKind::Tune,
            Command::Benchmark => ExperimentKind::Benchmark,
        }
    }
}

/// Run a PID simulation, stability or tuning experiment.
#[derive(Debug, Parser)]
#[command(name = "pidcert", version)]
struct Args {
    /// Experiment to run; defaults to the one named in the config.
    command: Option<Command>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> CliResult<serde_json::Value> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = args.command {
        cfg.experiment = c.into();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    cfg.validate()?;
    experiments::run(&cfg)?;
    Ok(serde_json::json!({
        "experiment": cfg.experiment,
        "output": cfg.output_root().join(cfg.experiment.dir_name()),
        "config_hash": cfg.hash(),
    }))
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
