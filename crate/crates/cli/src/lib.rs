//! Command-line front end for `tslmi`.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tslmi", version, about = "Switched non-PDC output-feedback synthesis and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a plant file for dimensional and structural problems.
    Validate {
        path: Option<PathBuf>,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Solve the LMI program and write the controller.
    Synth(#[command(flatten)] Overrides),
    /// Simulate the closed loop and write the trajectory.
    Simulate(#[command(flatten)] Overrides),
    /// Certify a controller: residuals, Lyapunov decrease, jumps, decay, attenuation.
    Verify(#[command(flatten)] Overrides),
    /// Full pipeline on the reproduction settings plus the acceptance checks.
    Repro(#[command(flatten)] Overrides),
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Validate { path, system } => {
            let path = path
                .or(system)
                .ok_or_else(|| CliError::new(error::Exit::Validation, "validate needs a plant file"))?;
            commands::cmd_validate(&path)
        }
        Command::Synth(o) => commands::cmd_synth(&RunConfig::resolve(&o, RunConfig::default())?),
        Command::Simulate(o) => commands::cmd_simulate(&RunConfig::resolve(&o, RunConfig::default())?),
        Command::Verify(o) => commands::cmd_verify(&RunConfig::resolve(&o, RunConfig::default())?),
        Command::Repro(o) => commands::cmd_repro(&RunConfig::resolve(&o, RunConfig::reproduction())?),
    }
}
