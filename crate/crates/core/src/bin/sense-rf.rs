use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sense_rf::config::ExperimentSpec;
use sense_rf::experiment::{self, Outcome, Overrides};
use sense_rf::Error;

#[derive(Parser)]
#[command(name = "sense-rf", version, about = "Energy-detection performance under RF front-end impairments")]
struct Cli {
    /// Worker threads for Monte Carlo (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its CSV table.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the closed forms of a config's scenario against simulation.
    Validate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<Outcome, Error> {
    let (config, seed, trials, out, force_validate) = match cli.command {
        Command::Run { config, seed, trials, out } => (config, seed, trials, out, false),
        Command::Validate { config, seed, trials, out } => (config, seed, trials, out, true),
    };
    let mut spec = ExperimentSpec::load(&config)?;
    if force_validate {
        spec.kind = sense_rf::config::ExperimentKind::Validate;
    }
    let overrides = Overrides { seed, trials };
    let outcome = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(|| experiment::run(&spec, overrides))?,
        None => experiment::run(&spec, overrides)?,
    };
    match out.or(spec.output.clone()) {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            outcome.table.write(std::io::BufWriter::new(file))?;
        }
        None => outcome.table.write(std::io::stdout().lock())?,
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(outcome) if outcome.validation_failed => {
            eprintln!("validation failed: too many points outside the agreement band");
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
