use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minsurf_cli::{list, load_config, run, CliError};

#[derive(Parser)]
#[command(name = "minsurf", version, about = "Run minimal-surface and generalized-Laplacian experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampler seed (overrides `sampler.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Samples per radius (overrides `sampler.samples`).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// List experiments, or the result columns of one.
    List { name: Option<String> },
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::List { name } => {
            print!("{}", list(name.as_deref())?);
            Ok(true)
        }
        Command::Run {
            config,
            out,
            seed,
            budget,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(s) = seed {
                cfg.sampler.seed = s;
            }
            if let Some(b) = budget {
                cfg.sampler.samples = b;
            }
            cfg.validate()?;
            let outcome = run(&cfg)?;
            for a in &outcome.assertions {
                if !a.passed {
                    eprintln!("assertion failed: {}: {}", a.name, a.detail);
                }
            }
            let passed = outcome.passed();
            println!(
                "{}: {} of {} assertions passed, artifacts in {}",
                cfg.experiment.name(),
                outcome.assertions.iter().filter(|a| a.passed).count(),
                outcome.assertions.len(),
                cfg.output_dir.display()
            );
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
