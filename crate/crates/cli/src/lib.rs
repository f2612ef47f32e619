//! Command-line front end: file formats, NDJSON reports and the `apd`
//! subcommands.

pub mod commands;
pub mod expr;
pub mod format;
pub mod report;

pub use commands::{run, Cli};
