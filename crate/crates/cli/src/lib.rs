//! Configuration, output handling and subcommands of the `loglap` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Command, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
pub use config::{emit, parse_config, with_overrides, RunConfig};
