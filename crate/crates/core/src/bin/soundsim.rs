use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use soundsim::cli::{execute, CliOptions, Command};

#[derive(Parser)]
#[command(name = "soundsim", version, about = "MU-MIMO channel sounding simulator")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (trace file for trace-gen)
    #[arg(long)]
    out: PathBuf,
    /// Maximum concurrent sessions
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated seeds replacing run.seeds
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    seed_override: Option<Vec<u64>>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fixed-interval sweep over group sizes and sounding intervals
    Sweep(Common),
    /// Single session with a full timeline
    Run(Common),
    /// Dynamic sounding against the LDA/HDA fixed baselines
    Compare(Common),
    /// Write a channel trace file
    TraceGen(Common),
}

fn main() -> ExitCode {
    let (command, c) = match Args::parse().command {
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Run(c) => (Command::Run, c),
        Cmd::Compare(c) => (Command::Compare, c),
        Cmd::TraceGen(c) => (Command::TraceGen, c),
    };
    let opts = CliOptions { config: c.config, out: c.out, jobs: c.jobs, seed_override: c.seed_override };
    ExitCode::from(execute(command, &opts) as u8)
}
