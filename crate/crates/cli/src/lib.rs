//! Configuration parsing and subcommand dispatch for the `amrmc` binary.

pub mod config;
pub mod dispatch;

pub use config::{parse_config, parse_config_with, ConfigErrors, Overrides, Params, RunConfig, Subcommand};
pub use dispatch::{
    dispatch, dispatch_with, execute, resolve_threads, CliError, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION,
};
