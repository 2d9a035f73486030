//! Command implementations behind the `aniso-ppa` binary.
//!
//! The binary is a thin argument parser; everything it does is exposed here
//! so integration tests can drive runs in-process: [`config`] parses the flat
//! INI-style experiment files, [`commands`] executes them ([`commands::cmd_run`],
//! [`commands::cmd_verify`], [`commands::cmd_rate_study`]) and formats the
//! tables the binary prints.

pub mod commands;
pub mod config;

/// Everything that can go wrong between a config file and its artifacts.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed configuration or flags.
    #[error("config error: {0}")]
    Config(String),
    /// Filesystem failures while reading configs or writing artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Failures raised by the solver library.
    #[error(transparent)]
    Solver(#[from] aniso_ppa::Error),
}
