//! Library half of the `bpgd` command-line tool. Each subcommand is a
//! function from resolved [`Settings`] to output on a writer.

pub mod commands;
pub mod settings;

use std::io::Write;

use anyhow::Result;
use clap::{Parser, Subcommand};

pub use commands::Status;
pub use settings::{CommonArgs, Settings};

#[derive(Parser, Debug)]
#[command(name = "bpgd", version, about = "Decode quantum LDPC codes with BP and guided decimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check G2·H1ᵀ = 0 and print the code parameters
    Validate,
    /// Decode one syndrome (or the syndrome of one error) and print JSON
    Decode,
    /// Monte Carlo block error rates over a list of probabilities
    Sweep,
    /// Repeated bpgd-rd decodes of one error, tallied by estimate
    Degeneracy,
    /// Exact DQML and sampling-decoder error rates with the factor-2 check
    SamplingBound,
    /// Write the hypergraph product of two alist matrices as a code file
    ConstructHgp,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status> {
    let s = Settings::resolve(&cli.common)?;
    match cli.command {
        Command::Validate => commands::cmd_validate(&s, out),
        Command::Decode => commands::cmd_decode(&s, out),
        Command::Sweep => commands::cmd_sweep(&s, out),
        Command::Degeneracy => commands::cmd_degeneracy(&s, out),
        Command::SamplingBound => commands::cmd_sampling_bound(&s, out),
        Command::ConstructHgp => commands::cmd_construct_hgp(&s, out),
    }
}
