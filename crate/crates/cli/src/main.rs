//! `scarce`: run simulations, sweeps, policy optimization and baselines.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{BackendKind, RunConfig};
use scarce_core::policy::Preset;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scarce", version, about = "Multi-queue scarce-housing allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation; writes trace.jsonl, outcome.json, metrics.json, run.json.
    Simulate(Common),
    /// Run a policy grid over seeds; writes sweep.csv.
    Sweep(Common),
    /// Surrogate-assisted GA search; writes best_policy.json, history.csv, dataset.csv.
    Optimize(Common),
    /// Assignment upper bound on welfare; writes baseline.json.
    Baseline(Common),
    /// Merge run directories into one CSV.
    Report {
        /// Directories holding metrics.json or sweep.csv.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file (or directory, then report.csv inside it).
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single run seed (replaces the configured seed list).
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent simulations.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    #[arg(long)]
    max_rounds: Option<u32>,
    /// Named policy: singapore, beijing, hong_kong, opt_satisfaction, opt_fairness.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::ALL
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| format!("unknown preset `{s}`; expected one of {}", Preset::ALL.map(|p| p.name()).join(", ")))
}

impl Common {
    /// Config file (or defaults) with command-line overrides applied.
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => config::load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seeds = vec![s];
        }
        if let Some(s) = &self.seeds {
            c.seeds = s.clone();
        }
        if let Some(o) = &self.out {
            c.out = Some(o.clone());
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        if let Some(b) = self.backend {
            c.backend = b;
        }
        if self.max_rounds.is_some() {
            c.max_rounds = self.max_rounds;
        }
        if let Some(p) = self.preset {
            c.policy = None;
            c.preset = Some(p);
        }
        c.check()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a.resolve()?),
        Command::Sweep(a) => commands::sweep(&a.resolve()?),
        Command::Optimize(a) => commands::optimize(&a.resolve()?),
        Command::Baseline(a) => commands::baseline(&a.resolve()?),
        Command::Report { inputs, out } => commands::report(&inputs, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
