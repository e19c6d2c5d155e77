//! Command-line front end: parameter ingestion, regime solving, sweeps,
//! verification, simulation and figure data.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

pub use args::{Cli, Command, RunArgs, RunConfig};
pub use commands::run;
pub use error::{CliError, CliResult};
