//! Command-line front end for graph Schrödinger verification experiments.

// `!(x > 0.0)`-style checks reject NaN parameters; see the library crate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use runner::RunContext;

#[derive(Parser)]
#[command(
    name = "schrograph",
    version,
    about = "Discrete Schrödinger calculus on weighted graphs: certification, verification and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute jump size, intrinsic bounds and admissible weight-rate
    /// thresholds for the configured graph, metric and potential
    Certify(RunArgs),
    /// Run the selected verification checks and write per-check reports
    Verify(RunArgs),
    /// Growth-vs-threshold experiment with the explicit growing solution
    Sharpness(RunArgs),
    /// Boundary-1 Dirichlet decay table against the closed form
    Decay(RunArgs),
    /// Ad-hoc Dirichlet solve written to a solution file
    Solve(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory (overrides the config's out_dir)
    #[arg(short, long)]
    out_dir: Option<PathBuf>,
    /// Suppress per-result stdout lines
    #[arg(short, long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&RunContext) -> anyhow::Result<bool>) = match &cli.command {
        Command::Certify(a) => (a, runner::cmd_certify),
        Command::Verify(a) => (a, runner::cmd_verify),
        Command::Sharpness(a) => (a, runner::cmd_sharpness),
        Command::Decay(a) => (a, runner::cmd_decay),
        Command::Solve(a) => (a, runner::cmd_solve),
    };
    let outcome = RunContext::new(&args.config, args.out_dir.as_deref(), args.quiet)
        .and_then(|ctx| run(&ctx));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
