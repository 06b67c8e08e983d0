use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use juice_core::harness::{self, ExperimentSpec};

#[derive(Parser)]
#[command(name = "juice", version, about = "Joint activity detection and channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the SNR sweep and write the results CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to `output_path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Small CI profile (N=50, M=8, K=4, tau_p=12, 50 trials).
        #[arg(long)]
        quick: bool,
        /// Worker threads (0 = all cores). JUICE_THREADS takes precedence.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Per-iteration NASE curves at one SNR.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "snr-db", allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long)]
        trials: usize,
        /// Output CSV; defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config, then print it normalized.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentSpec> {
    Ok(harness::validate_spec(path)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Run { config, out, seed, quick, parallelism } => {
            let mut spec = load(&config)?;
            if quick {
                spec = spec.quick();
            }
            if let Some(s) = seed {
                spec.system.seed = s;
            }
            if let Some(p) = parallelism {
                spec.parallelism = p;
            }
            let out = out.unwrap_or_else(|| PathBuf::from(&spec.output_path));
            let result = harness::run(&spec)?;
            harness::write_csv(&result, &out).with_context(|| format!("writing {}", out.display()))?;
            if let Some(e) = &result.error {
                eprintln!("error: {e}");
                eprintln!("partial results written to {}", out.display());
                return Ok(ExitCode::FAILURE);
            }
            eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
        }
        Cmd::Converge { config, snr_db, trials, out } => {
            let spec = load(&config)?;
            let rows = harness::run_convergence_probe(&spec, snr_db, trials)?;
            match out {
                Some(p) => harness::write_probe_csv(&rows, &p).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{}", harness::probe_csv(&rows)),
            }
        }
        Cmd::Validate { config } => {
            let spec = load(&config)?;
            print!("{}", spec.to_toml());
        }
    }
    Ok(ExitCode::SUCCESS)
}
