//! Configuration, file formats, experiment drivers and the command line for
//! `cmv-krylov`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod tables;
pub mod verify;

pub use error::{CliError, CliResult};
