//! Std companion to `sideband-core`: JSON configs, CSV/JSON files, the
//! Langevin Monte-Carlo oracle, the synthetic calibration chain and the
//! `sideband-lab` command line.

pub mod calibrate;
pub mod cli;
pub mod config;
pub mod io;
pub mod oracle;
pub mod synthetic;

pub use config::{Config, ConfigError, Resolved};
