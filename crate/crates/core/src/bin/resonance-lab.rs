use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use resonance_lab::harness::config::ExperimentConfig;
use resonance_lab::harness::experiments::{run_experiment, Experiment, RunOptions};
use resonance_lab::Result;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Decay,
    Scaling,
    Sojourn,
    Concentration,
    SpectrumCheck,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Decay => Experiment::Decay,
            Command::Scaling => Experiment::Scaling,
            Command::Sojourn => Experiment::Sojourn,
            Command::Concentration => Experiment::Concentration,
            Command::SpectrumCheck => Experiment::SpectrumCheck,
        }
    }
}

/// Decay, sojourn and spectral-concentration experiments for an embedded
/// eigenvalue under a rank-one perturbation.
///
/// Exit codes: 0 success, 2 hypothesis failure, 3 numerical non-convergence,
/// 4 configuration error.
#[derive(Debug, Parser)]
#[command(name = "resonance-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to `output.directory` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run on a single worker (byte-identical output).
    #[arg(long)]
    serial: bool,
    /// Override the coupling list.
    #[arg(long, num_args = 1..)]
    kappa: Vec<f64>,
    /// Override the final time.
    #[arg(long)]
    tmax: Option<f64>,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut config = ExperimentConfig::load(&cli.config)?;
    if !cli.kappa.is_empty() {
        config = config.with_kappas(cli.kappa)?;
    }
    if let Some(t) = cli.tmax {
        config = config.with_t_max(t)?;
    }
    let out = match (cli.out, &config.output.directory) {
        (Some(o), _) => o,
        (None, Some(d)) => config.base_dir.join(d),
        (None, None) => {
            return Err(resonance_lab::Error::Config(
                "no output directory: pass --out or set output.directory".into(),
            ))
        }
    };
    run_experiment(cli.command.into(), &config, &out, RunOptions { serial: cli.serial })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
