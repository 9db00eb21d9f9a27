//! `quench`: command-line front end for the MEMS quenching laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 missing input.

mod commands;
mod config;
mod failure;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::failure::Failure;
use crate::record::RunRecord;

#[derive(Parser)]
#[command(name = "quench", version, about = "Steady states, quenching simulations and bounds for u_t = Δu + λf/(1-u)²")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the minimal branch and locate the pull-in voltage λ*.
    Steady(Common),
    /// Integrate from rest until quenching or t_max.
    Simulate(Common),
    /// Run several λ concurrently and tabulate measured times against the bounds.
    Sweep(Common),
    /// Evaluate every quenching-time bound at one λ.
    Bounds(Common),
    /// Self-similar frame and frozen energy of an earlier simulate run.
    Rescale(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    /// slab_sin_piecewise, constant[:c], power:<exponent> or csv:<path>.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    quench_eps: Option<f64>,
}

fn run(name: &str, args: &Common, driver: fn(&RunConfig, &std::path::Path) -> Result<commands::Outcome, Failure>) -> Result<(), Failure> {
    let started = record::timestamp();
    let overrides = Overrides {
        output_dir: args.out.clone(),
        lambda: args.lambda,
        node_count: args.nodes,
        profile: args.profile.clone(),
        quench_eps: args.quench_eps,
    };
    let cfg = RunConfig::load(args.config.as_deref(), &overrides)?;
    cfg.validate()?;
    cfg.validate_for(name)?;
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out)?;
    let outcome = driver(&cfg, &out)?;
    for w in &outcome.warnings {
        eprintln!("{w}");
    }
    RunRecord {
        tool: "quench",
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        started,
        finished: record::timestamp(),
        manifest: record::manifest(&out, &outcome.files)?,
        config: cfg,
        quench: outcome.quench,
        bounds: outcome.bounds,
    }
    .write(&out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Steady(a) => run("steady", a, commands::steady),
        Command::Simulate(a) => run("simulate", a, commands::simulate),
        Command::Sweep(a) => run("sweep", a, commands::sweep),
        Command::Bounds(a) => run("bounds", a, commands::bounds),
        Command::Rescale(a) => run("rescale", a, commands::rescale_run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
