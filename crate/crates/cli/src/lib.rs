//! Command-line pipeline around `fmds-core`: file formats, run manifests,
//! SVG plots and the `fmds` subcommands.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod svg;

pub use cli::{Cli, Commands};
pub use error::{CliError, Result};
pub use manifest::RunManifest;

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Commands::Dissim(args) => commands::run_dissim(args),
        Commands::Cmds(args) => commands::run_cmds(args),
        Commands::Fmds(args) => commands::run_fmds(args),
        Commands::Verify(args) => commands::run_verify(args),
        Commands::Synth(args) => commands::run_synth(args),
    }
}
