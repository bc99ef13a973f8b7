//! The `mweica` command-line tool: `mix`, `unmix`, `index` and `bench`.
//!
//! Every command writes into its `--out` directory through a staging area,
//! so a failed run leaves no partial outputs, and records a `meta.txt` of
//! `key=value` lines with all seeds, resolved options and input digests.
//! Exit status is 0 on success, 2 for input or validation errors and 3 when
//! the computation itself fails.

pub mod args;
mod commands;
mod error;
mod media;
mod methods;
mod output;

pub use args::Cli;
pub use commands::trial_seeds;
pub use error::{CliError, Result, EXIT_ALGORITHM, EXIT_INPUT};

use args::Command;

/// Runs one parsed command and returns its one-line summary.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Mix(a) => commands::cmd_mix(a),
        Command::Unmix(a) => commands::cmd_unmix(a),
        Command::Index(a) => commands::cmd_index(a),
        Command::Bench(a) => commands::cmd_bench(a),
    }
}
