//! Command-line front end for `oamcv`: state construction, channel sweeps,
//! sudden-death thresholds, tomography round trips and beam diagnostics.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use args::{run, Cli};
pub use config::{EtaGrid, Preset, SweepConfig};
pub use error::{CliError, CliResult};
