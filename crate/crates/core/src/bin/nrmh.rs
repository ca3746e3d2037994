use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nrmh::experiment::{
    run_discrete_demo, run_gaussian, write_discrete_demo, write_gaussian, ExperimentConfig, ExperimentError, Scenario,
};

#[derive(Parser)]
#[command(name = "nrmh", version, about = "Non-reversible Metropolis-Hastings experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 3-dimensional Gaussian benchmark with the known optimal skew drift
    Experiment3d(Common),
    /// 9-dimensional Gaussian benchmark with a numerically optimized skew drift
    Experiment9d(Common),
    /// Finite-state kernels, exact asymptotic variances and rate functions
    DiscreteDemo(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, discrete: bool) -> Result<ExperimentConfig, ExperimentError> {
        let mut cfg = ExperimentConfig::default();
        if discrete {
            cfg.steps = 100_000;
        }
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Experiment3d(c) => gaussian(Scenario::ThreeD, &c),
        Command::Experiment9d(c) => gaussian(Scenario::NineD, &c),
        Command::DiscreteDemo(c) => {
            let cfg = c.resolve(true)?;
            let report = run_discrete_demo(&cfg)?;
            write_discrete_demo(&report, &cfg)?;
            print!("{}", report.summary());
            Ok(())
        }
    }
}

fn gaussian(scenario: Scenario, c: &Common) -> Result<(), ExperimentError> {
    let cfg = c.resolve(false)?;
    let report = run_gaussian(scenario, &cfg)?;
    write_gaussian(&report, &cfg)?;
    print!("{}", report.summary());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
