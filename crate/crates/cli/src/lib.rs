//! Library side of the `nlg` command-line tool.

pub mod commands;
pub mod format;
pub mod suites;

pub use commands::{run, Cli, Outcome};
