//! `heatrate`: reports, sweeps, simulations, and cross-checks for
//! rate-type heat conduction models.

use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use heatrate::DEFAULT_MODES;
use heatrate_cli::{commands, RunConfig, SweepAxis};

#[derive(Parser)]
#[command(
    name = "heatrate",
    version,
    about = "Reports, sweeps, simulations, and cross-checks for rate-type heat conduction models"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Model parameter file, e.g. {"kind":"lso","lambda":0.25,...}
    #[arg(long, global = true, value_name = "FILE.json")]
    model: Option<PathBuf>,

    /// Directory for report and CSV output
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Number of spatial modes (default: 10; simulate: 64)
    #[arg(long, global = true, value_name = "N")]
    modes: Option<usize>,

    /// Output grid intervals for simulate
    #[arg(long, global = true, value_name = "N", default_value_t = 128)]
    grid: usize,

    /// Time horizon for simulate
    #[arg(long, global = true, value_name = "T", default_value_t = 1.0)]
    horizon: f64,

    /// Sweep axis as name:min:max:count (repeat for a second axis)
    #[arg(long, global = true, value_name = "SPEC")]
    sweep: Vec<String>,

    /// Seed for the randomized cross-checks
    #[arg(long, global = true, value_name = "S", default_value_t = 0)]
    seed: u64,

    /// Corrupt one verified matrix entry (validate test hook)
    #[arg(long, global = true, hide = true)]
    fault: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify parameters against the regime catalog and verify recipes
    Consistency,
    /// Per-mode damping verdicts and the admissible mu region
    Stability,
    /// Characteristic-root table for the first N modes
    Roots,
    /// Evolve a sine initial profile and write the sampled field
    Simulate,
    /// Map classification and stability over a parameter grid
    Sweep,
    /// Run the randomized cross-check suite
    Validate,
}

fn main() {
    let cli = Cli::parse();
    let mut sweep = Vec::new();
    for spec in &cli.sweep {
        match SweepAxis::parse(spec) {
            Ok(a) => sweep.push(a),
            Err(f) => {
                eprintln!("error: {}", f.message);
                process::exit(f.code);
            }
        }
    }
    let default_modes = match cli.command {
        Cmd::Simulate => DEFAULT_MODES,
        _ => 10,
    };
    let cfg = RunConfig {
        model: cli.model,
        out: cli.out,
        modes: cli.modes.unwrap_or(default_modes),
        grid: cli.grid,
        horizon: cli.horizon,
        sweep,
        seed: cli.seed,
        fault: cli.fault,
    };
    let result = match cli.command {
        Cmd::Consistency => commands::cmd_consistency(&cfg),
        Cmd::Stability => commands::cmd_stability(&cfg),
        Cmd::Roots => commands::cmd_roots(&cfg),
        Cmd::Simulate => commands::cmd_simulate(&cfg),
        Cmd::Sweep => commands::cmd_sweep(&cfg),
        Cmd::Validate => commands::cmd_validate(&cfg),
    };
    match result {
        Ok(code) => process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            process::exit(f.code);
        }
    }
}
