//! Experiment drivers behind the subcommands.

pub mod binning;
pub mod dual;
pub mod ensemble;
pub mod ising;
pub mod top;
