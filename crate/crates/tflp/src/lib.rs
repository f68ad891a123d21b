//! File formats, configuration, parallel ensembles, verification suites and
//! the command implementations behind the `tflp` binary.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod ensemble;
pub mod error;
pub mod manifest;
pub mod verify;

pub use error::{exit, CliError, CliResult};
pub use tflp_core;
