//! Experiment runner for the `minsurf` library.
//!
//! [`run`] executes one configured experiment and writes three files to the
//! output directory: `results.csv` (the experiment's table), `summary.json`
//! (assertions and metrics) and `manifest.conf` (the resolved configuration,
//! which reproduces the run when fed back in).

pub mod config;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::ExperimentConfig;
pub use experiments::{run_experiment, Experiment, Outcome, CATALOG};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] minsurf::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for anything the configuration could fix, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use minsurf::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidParameter(_)
                | E::UnknownSurface(_)
                | E::OutOfDomain { .. }
                | E::ChartTooSmall { .. }
                | E::NotOnSurface { .. }
                | E::Parse(_),
            ) => 2,
            _ => 1,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

/// Runs the experiment and writes its artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let outcome = run_experiment(cfg)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io(dir))?;

    let csv_path = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(cfg.experiment.info().columns.iter().map(|c| c.0))?;
    for row in &outcome.rows {
        w.write_record(row)?;
    }
    w.flush().map_err(io(&csv_path))?;

    let summary = json!({
        "experiment": cfg.experiment.name(),
        "surface": cfg.surface,
        "passed": outcome.passed(),
        "assertions": outcome.assertions,
        "metrics": outcome.metrics,
        "rows": outcome.rows.len(),
    });
    let summary_path = dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n").map_err(io(&summary_path))?;
    let manifest_path = dir.join("manifest.conf");
    fs::write(&manifest_path, cfg.to_manifest()).map_err(io(&manifest_path))?;
    Ok(outcome)
}

/// Sorted experiment listing, or one experiment's columns.
pub fn list(name: Option<&str>) -> Result<String, CliError> {
    let mut s = String::new();
    match name {
        None => {
            for e in &CATALOG {
                s.push_str(&format!("{:<20} {}\n", e.name, e.description));
            }
        }
        Some(n) => {
            let e = Experiment::from_name(n).ok_or_else(|| CliError::Config(format!("unknown experiment `{n}`")))?;
            let info = e.info();
            s.push_str(&format!("{}: {}\ncolumns:\n", info.name, info.description));
            for (c, d) in info.columns {
                s.push_str(&format!("  {c:<12} {d}\n"));
            }
        }
    }
    Ok(s)
}
