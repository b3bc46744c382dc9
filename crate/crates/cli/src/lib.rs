//! Command-line front end: JSON input documents, the subcommand pipelines
//! and their reports.

pub mod commands;
pub mod input;
pub mod report;

pub use commands::{run, Command, Outcome, RunOptions};
