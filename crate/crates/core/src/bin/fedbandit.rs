//! Command-line driver for the federated bandit simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use robust_fedbandit::harness::{
    oracle_check_command, run_command, sweep_command, BatteryOptions, ExitStatus, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "fedbandit",
    version,
    about = "Byzantine-robust federated linear bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every repetition of one configuration.
    Run(RunArgs),
    /// Run the cross product of the axes in a sweep file.
    Sweep(RunArgs),
    /// Check the aggregation and linear-algebra invariants.
    OracleCheck(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration (or sweep specification).
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path override such as `attack.alpha=0.2`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; defaults to `output.dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct CheckArgs {
    /// Instances per check instead of the defaults.
    #[arg(long)]
    trials: Option<usize>,
    /// Shift the geometric median by 0.1 to confirm the checks fail.
    #[arg(long)]
    inject_bug: bool,
    #[arg(long, default_value_t = BatteryOptions::default().seed)]
    seed: u64,
}

impl From<RunArgs> for RunOptions {
    fn from(a: RunArgs) -> Self {
        RunOptions {
            config: a.config,
            overrides: a.overrides,
            out: a.out,
            jobs: a.jobs,
        }
    }
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let mut stderr = std::io::stderr();
    let status = match cli.command {
        Command::Run(args) => run_command(&args.into(), &mut stderr),
        Command::Sweep(args) => sweep_command(&args.into(), &mut stderr),
        Command::OracleCheck(args) => {
            let opts = BatteryOptions {
                trials: args.trials,
                inject_bug: args.inject_bug,
                seed: args.seed,
            };
            let mut stdout = std::io::stdout();
            let status = oracle_check_command(opts, &mut stdout);
            std::io::Write::flush(&mut stdout).context("flushing the check report")?;
            status
        }
    };
    Ok(match status {
        ExitStatus::Success => ExitCode::SUCCESS,
        other => ExitCode::from(other.code() as u8),
    })
}
