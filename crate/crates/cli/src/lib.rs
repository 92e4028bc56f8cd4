//! Command-line front end: run configuration, output directories with
//! manifests, SVG rendering and the verification suite.

pub mod args;
pub mod checks;
pub mod commands;
pub mod config;
pub mod output;
pub mod render;

use anyhow::Result;

use args::{Cli, Command};
use commands::Outcome;
use config::RunConfig;

/// Resolves the configuration (file, then flags) and runs the subcommand.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.apply(&mut cfg);
    match &cli.command {
        Command::Enumerate(_) => commands::enumerate(&cfg),
        Command::Sample(_) => commands::sample(&cfg),
        Command::Census(a) => commands::census(&cfg, &a.inputs),
        Command::Surgery(a) => commands::surgery(&cfg, &a.input),
        Command::Partitions(_) => commands::partitions(&cfg),
        Command::Keane(a) => commands::keane(&cfg, &a.inputs),
        Command::Render(a) => commands::render(&cfg, &a.input),
        Command::Verify(a) => commands::verify(&cfg, a.quick),
    }
}
