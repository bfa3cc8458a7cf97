//! Library half of the `aircont` command-line tool: config parsing, run
//! manifests and the subcommands, callable without spawning a process.

pub mod commands;
pub mod config;
pub mod error;
pub mod validate;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::CliError;
