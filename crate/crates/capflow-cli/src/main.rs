use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Simulator and verification suite for volume- and area-preserving power
/// mean curvature flow of convex capillary hypersurfaces in the half-space.
#[derive(Parser)]
#[command(name = "capflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured flow and write the artifact set
    Run {
        /// Path to a key=value configuration file
        config: PathBuf,
    },
    /// Print the closed-form quantities of a spherical cap
    CapInfo {
        /// Dimension: 1 (planar) or 2 (axisymmetric)
        #[arg(long)]
        n: usize,
        /// Contact angle in radians
        #[arg(long)]
        theta: f64,
        /// Cap radius
        #[arg(long)]
        r: f64,
    },
    /// Capillary radii and best-fit cap of a stored snapshot
    Radii {
        /// Path to a .snap file
        snapshot: PathBuf,
    },
    /// Run the built-in verification configurations
    Verify {
        /// Small subset that finishes in a few seconds
        #[arg(long)]
        quick: bool,
    },
    /// Render SVG plots from a snapshot or a series.csv
    Plot {
        /// Path to a .snap or .csv file
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => capflow_cli::cmd_run(&config),
        Command::CapInfo { n, theta, r } => capflow_cli::cmd_cap_info(n, theta, r),
        Command::Radii { snapshot } => capflow_cli::cmd_radii(&snapshot),
        Command::Verify { quick } => capflow_cli::cmd_verify(quick),
        Command::Plot { path } => capflow_cli::cmd_plot(&path),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
