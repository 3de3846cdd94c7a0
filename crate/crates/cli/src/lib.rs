//! Configuration, file formats and subcommand drivers for `invasionlab`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::{InitSpec, RunConfig};
pub use error::{CliError, CliResult};
pub use invasionlab_core as core;
