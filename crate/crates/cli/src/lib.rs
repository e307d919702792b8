//! Experiment runner behind the `qarrow` binary: builds CSV datasets for the
//! identity check, Bloch trajectories, entropy-production statistics, the τ
//! sweep, Crooks fits and characteristic functions.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("tolerance failure: {0}")]
    Tolerance(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] qarrow_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use qarrow_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(E::Config(_) | E::Validation(_) | E::Domain(_) | E::Grid(_)) => 2,
            CliError::Core(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qarrow", version, about = "Driven-qubit entropy production experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Quench durations in μs, comma separated.
    #[arg(long = "tau-us", global = true, value_delimiter = ',')]
    pub tau_us: Option<Vec<f64>>,

    #[arg(long, global = true)]
    pub noise_sigma: Option<f64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mean entropy production against the forward/backward relative entropy.
    Identity,
    /// Forward, backward and quasistatic Bloch trajectories.
    Fig3,
    /// Entropy-production distribution per quench duration.
    Fig4a,
    /// Mean entropy production and its linear-response estimate over τ.
    Fig4c,
    /// β and ΔF from interferometrically measured work distributions.
    Crooks,
    /// Sampled characteristic functions and their spectra.
    Charfn,
}

impl Cli {
    /// Defaults, then the config file, then command-line overrides.
    pub fn resolve_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|source| CliError::Io { path: path.clone(), source })?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(t) = &self.tau_us {
            cfg.tau_list_us = t.clone();
        }
        if let Some(s) = self.noise_sigma {
            cfg.noise_sigma = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What a command produced. Files are only written once everything is computed.
#[derive(Debug, Default)]
pub struct Report {
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub summary: Vec<String>,
    /// Non-fatal observations, printed to stderr.
    pub advisories: Vec<String>,
    /// Set when the data were produced but a check failed.
    pub failure: Option<CliError>,
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match command {
        Command::Identity => commands::run_identity(cfg),
        Command::Fig3 => commands::run_figure3(cfg),
        Command::Fig4a => commands::run_figure4a(cfg),
        Command::Fig4c => commands::run_figure4c(cfg),
        Command::Crooks => commands::run_crooks(cfg),
        Command::Charfn => commands::run_charfn(cfg),
    }
}

/// Writes each file through a temporary sibling and a rename, so readers never
/// see partial output.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(io(&tmp))?;
        f.write_all(body.as_bytes()).map_err(io(&tmp))?;
        f.sync_all().map_err(io(&tmp))?;
        fs::rename(&tmp, &target).map_err(io(&target))?;
        written.push(target);
    }
    Ok(written)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = cli.resolve_config().and_then(|cfg| {
        let report = execute(cli.command, &cfg)?;
        let written = write_files(&cfg.output_dir, &report.files)?;
        Ok((report, written))
    });
    match result {
        Ok((report, written)) => {
            for p in written {
                println!("wrote {}", p.display());
            }
            for line in &report.summary {
                println!("{line}");
            }
            for line in &report.advisories {
                eprintln!("advisory: {line}");
            }
            match report.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
