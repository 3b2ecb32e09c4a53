use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pqsi_harness::config::ExperimentConfig;
use pqsi_harness::{sweep, verify, HarnessError};

#[derive(Parser)]
#[command(name = "pqsi", version, about = "Purest quantum state identification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial of the first grid cell and print its transcript.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Trial index within the cell.
        #[arg(long, default_value_t = 0)]
        trial: u32,
    },
    /// Run the full grid and write the result CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suites and print one PASS/FAIL line each.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the gap profile and bound arguments for the configured ensemble.
    Exponents {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `workers` in the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Clamp the final phase so no run exceeds its budget.
    #[arg(long)]
    strict_budget: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = ExperimentConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        if let Some(w) = self.workers {
            cfg.workers = w.max(1);
        }
        cfg.strict_budget |= self.strict_budget;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Simulate { common, trial } => {
            let cfg = common.load()?;
            print!("{}", sweep::simulate(&cfg, trial)?);
        }
        Command::Sweep { common } => {
            let cfg = common.load()?;
            let result = sweep::run_sweep(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    result.write(path)?;
                    eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
                }
                None => print!("{}", result.to_csv()?),
            }
        }
        Command::Verify { seed } => {
            let results = verify::quick_suite(seed)?;
            for r in &results {
                println!("{}", r.line());
            }
            if results.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Exponents { common } => {
            let cfg = common.load()?;
            print!("{}", sweep::exponents(&cfg)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
