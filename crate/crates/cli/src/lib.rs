//! Command-line front end: problem files in, deterministic reports out.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Command, Output};
pub use config::{Format, ProblemConfig};
pub use error::CliError;
