use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use chemoviro::cli::{execute, RunOptions};

#[derive(Parser)]
#[command(
    name = "chemoviro",
    version,
    about = "Batch toolkit for a tumour model under virotherapy and chemotherapy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file to run
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override a config entry; bare keys address [parameters], dotted keys
    /// a section (initial.U=2e4, simulate.days=400). Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (default: $CHEMOVIRO_OUT, then ./out)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write SVG charts
    #[arg(long)]
    plots: bool,
    /// Worker threads for sweep cells (default: all cores)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a model variant and write the trajectory
    Simulate(Common),
    /// Steady states of a variant with stability verdicts
    Equilibria(Common),
    /// Stability verdicts across a parameter grid
    Stability(Common),
    /// Reproduction number and its response to the infusion rate
    R0(Common),
    /// Elasticities of the reproduction number
    Elasticity(Common),
    /// Parameter sensitivities of the coexistence state
    #[command(name = "endemic-sensitivity")]
    EndemicSensitivity(Common),
    /// Optimal dosing schedules via forward-backward sweep
    Optimize(Common),
    /// Cartesian parameter sweep, one summary row per cell
    Sweep(Common),
}

fn main() {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Equilibria(c) => ("equilibria", c),
        Command::Stability(c) => ("stability", c),
        Command::R0(c) => ("r0", c),
        Command::Elasticity(c) => ("elasticity", c),
        Command::EndemicSensitivity(c) => ("endemic-sensitivity", c),
        Command::Optimize(c) => ("optimize", c),
        Command::Sweep(c) => ("sweep", c),
    };
    let opts = RunOptions {
        config: common.config.clone(),
        sets: common.set.clone(),
        out: common.out.clone(),
        plots: common.plots,
        workers: common.workers,
    };
    std::process::exit(execute(name, &opts));
}
