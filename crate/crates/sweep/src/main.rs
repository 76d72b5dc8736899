use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use optomech_sweep::{emit, run_sweep, Format, SweepConfig, THREADS_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "optomech",
    version,
    about = "Parameter sweeps of coupled optomechanical cavities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the sweep described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
        /// Worker threads (default: all cores).
        #[arg(long, env = THREADS_ENV)]
        threads: Option<usize>,
        /// Also write drift, diffusion and covariance matrices per point.
        #[arg(long)]
        export_matrices: bool,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

fn main() -> ExitCode {
    let Command::Simulate {
        config,
        out_dir,
        format,
        threads,
        export_matrices,
    } = Cli::parse().command;

    let bytes = match std::fs::read(&config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match std::str::from_utf8(&bytes)
        .map_err(|e| e.to_string())
        .and_then(|t| SweepConfig::from_json(t).map_err(|e| e.to_string()))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    let records = pool.install(|| run_sweep(&cfg, export_matrices));

    if let Err(e) = emit(&out_dir, &cfg, &bytes, &records, format, export_matrices) {
        eprintln!("{e}");
        return ExitCode::FAILURE;
    }
    let failed: Vec<_> = records.iter().filter(|r| r.reason.is_failure()).collect();
    eprintln!(
        "{} points, {} unstable, {} failed -> {}",
        records.len(),
        records
            .iter()
            .filter(|r| r.reason == optomech_sweep::Reason::Unstable)
            .count(),
        failed.len(),
        out_dir.display()
    );
    for r in failed.iter().take(5) {
        eprintln!("  point {}: {} ({})", r.index, r.reason.code(), r.message);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}
