use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use benjamin_cli::{execute, Command, Invocation};
use clap::{Args, Parser, Subcommand};

/// Spectral solver for periodic Benjamin-type equations u_t - L u_x + f(u)_x = 0.
#[derive(Parser)]
#[command(name = "benj", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the initial data; write snapshots, invariants.csv and a manifest.
    Solve(RunArgs),
    /// Run a convergence study over converge.n_values; write convergence.csv.
    Converge(RunArgs),
    /// Build a solitary wave of speed soliton.speed and propagate it.
    Soliton(RunArgs),
    /// Recompute C, I and E for snapshot files and print them as CSV.
    Invariants {
        #[command(flatten)]
        run: RunArgs,
        /// Snapshot files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Replace a configuration entry; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

/// `BENJ_THREADS` caps the worker pool; unset or 0 means automatic.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("BENJ_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("BENJ_THREADS must be a non-negative integer, got `{value}`"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let (command, args, files) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a, Vec::new()),
        Cmd::Converge(a) => (Command::Converge, a, Vec::new()),
        Cmd::Soliton(a) => (Command::Soliton, a, Vec::new()),
        Cmd::Invariants { run, files } => (Command::Invariants, run, files),
    };
    let inv = Invocation {
        config: args.config,
        overrides: args.overrides,
        quiet: args.quiet,
        files,
    };
    let code = execute(command, &inv);
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
