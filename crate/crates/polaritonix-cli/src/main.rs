mod config;
mod error;
mod experiments;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Experiment, RunConfig};
use error::CliError;

/// Run one experiment from a JSON config and write its tables and manifest.
#[derive(Debug, Parser)]
#[command(name = "polaritonix", version)]
struct Args {
    experiment: Experiment,

    #[arg(long)]
    config: PathBuf,

    /// Overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; defaults to the available cores.
    #[arg(long, env = "POLARITONIX_WORKERS")]
    workers: Option<usize>,

    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Write the mean spectrum instead of one file per realization.
    #[arg(long)]
    aggregate: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("{}: {e}", args.config.display())))?;
    let mut config = RunConfig::parse(&text, args.experiment)?;
    if let Some(seed) = args.seed {
        config.shared.master_seed = seed;
    }
    let workers = match args.workers {
        Some(0) => return Err(CliError::config("workers must be at least 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    fs::create_dir_all(&args.out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let seed = config.shared.master_seed;
    let tables = pool.install(|| experiments::run(&config.params, seed, args.aggregate))?;

    let mut files = Vec::with_capacity(tables.len());
    for t in &tables {
        files.push(t.write(&args.out, config.shared.format)?);
    }
    let manifest = output::write_manifest(&args.out, &config, workers, &files)?;
    eprintln!("polaritonix: wrote {} table(s) and {}", files.len(), manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polaritonix: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
