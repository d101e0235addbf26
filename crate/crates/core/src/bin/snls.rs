use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use snls::config::{parse_config, ExperimentKind};
use snls::experiments::run_experiment;
use snls::Error;

#[derive(Parser)]
#[command(version, about = "Spectral-Galerkin experiments for stochastic NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (output bytes do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides run.out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectories with per-step diagnostics
    Simulate { config: PathBuf },
    /// Overflow statistics of the explicit schemes
    Diverge { config: PathBuf },
    /// Strong errors against a coupled reference
    Converge { config: PathBuf },
    /// Tail probabilities of path suprema
    Tails { config: PathBuf },
    /// Gronwall envelopes
    Bounds { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), Error> {
    let (kind, path) = match cli.command {
        Command::Simulate { config } => (ExperimentKind::Simulate, config),
        Command::Diverge { config } => (ExperimentKind::Diverge, config),
        Command::Converge { config } => (ExperimentKind::Converge, config),
        Command::Tails { config } => (ExperimentKind::Tails, config),
        Command::Bounds { config } => (ExperimentKind::Bounds, config),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let cfg = parse_config(&text)?;
    if cfg.experiment.is_some_and(|k| k != kind) {
        log::warn!("config declares experiment {:?}, running {kind:?}", cfg.experiment.unwrap());
    }
    let out = cli.out.unwrap_or_else(|| cfg.output_dir());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    for file in pool.install(|| run_experiment(kind, &cfg, &out))? {
        println!("{}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
