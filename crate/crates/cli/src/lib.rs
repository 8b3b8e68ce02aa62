//! Command-line front end for pixelwise change detection with a broad network.
//!
//! Each subcommand is a library function taking a [`RunConfig`] and a writer
//! for its console output, so the binary is a thin argument parser.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod synth;

pub use args::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult, Stage};
