use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use jncld::cli::{self, RunOptions, SelftestOptions};

/// Relay-side network-coded LDPC decoding: BER sweeps and self-checks.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory, overriding the experiment file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding every block's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every block of an experiment file.
    Run {
        file: PathBuf,
        /// Write 0 in the seconds column so reruns produce identical files.
        #[arg(long)]
        no_timing: bool,
        /// No progress output.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Run the built-in checks.
    Selftest {
        /// Corrupt the real closed form on purpose (negative control).
        #[arg(long, hide = true)]
        corrupt_closed_form: bool,
    },
}

fn main() -> anyhow::Result<ExitCode> {
    let args = Args::parse();
    match args.command {
        Command::Run {
            file,
            no_timing,
            quiet,
        } => {
            if args.workers == Some(0) {
                anyhow::bail!("--workers must be at least 1");
            }
            let exp = cli::load_experiment(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let opts = RunOptions {
                workers: args.workers,
                out_dir: args.out,
                seed: args.seed,
                no_timing,
                quiet,
            };
            let summary = cli::run(&exp, &opts)?;
            for b in &summary.blocks {
                println!("{}", b.csv.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest {
            corrupt_closed_form,
        } => {
            let report = cli::selftest(SelftestOptions {
                corrupt_closed_form,
            });
            println!("{report}");
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
