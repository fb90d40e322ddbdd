//! `rsft` command-line driver: one subcommand per experiment, configured
//! by an optional TOML file, writing CSV tables to an output directory.

mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Kind};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rsft", version, about = "Sparse spectrum detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config; defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config output directory (default `out`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run the sparse pipeline on a simulated signal.
    Run,
    /// Design the two detection thresholds.
    Optimize,
    /// Detection-vs-false-alarm curves over B, K and eta_p.
    Roc,
    /// Operation counts and minimum-cost reduced sizes.
    Complexity,
    /// Worst-case SNR across one bin of frequency.
    FreqSweep,
    /// Tightness of the occurrence-count variance bound.
    VarianceCheck,
    /// Averaged periodogram baseline on a simulated signal.
    Bartlett,
    /// Radar scene through the 3-D sparse and conventional paths.
    RadarSim,
}

impl From<Command> for Kind {
    fn from(c: Command) -> Self {
        match c {
            Command::Run => Kind::Run,
            Command::Optimize => Kind::Optimize,
            Command::Roc => Kind::Roc,
            Command::Complexity => Kind::Complexity,
            Command::FreqSweep => Kind::FreqSweep,
            Command::VarianceCheck => Kind::VarianceCheck,
            Command::Bartlett => Kind::Bartlett,
            Command::RadarSim => Kind::RadarSim,
        }
    }
}

fn load(cli: &Cli, kind: Kind) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(k) = cfg.experiment {
        if k != kind {
            return Err(CliError::Config(format!(
                "experiment: config is for `{}` but `{}` was requested",
                k.name(),
                kind.name()
            )));
        }
    }
    cfg.experiment = Some(kind);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = Some(d.clone());
    }
    cfg.validate(kind)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let kind = Kind::from(cli.command);
    let cfg = load(cli, kind)?;
    let outcome = experiments::run(kind, &cfg)?;
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    output::write_tables(&dir, &outcome.tables, kind.name(), &cfg.hash(), cfg.seed)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for t in &outcome.tables {
        println!("wrote {}", dir.join(format!("{}.csv", t.name)).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rsft: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
