//! Files, configuration and subcommands around [`thinfilm_core`].
//!
//! Every subcommand resolves a configuration (defaults, then an optional TOML
//! file, then flags), validates it, runs, and writes CSV and/or JSON files
//! into the output directory together with a plot manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

pub use thinfilm_core as core;

/// Version string embedded in every output file.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "THINFILM_OUT_DIR";

/// A problem with the request rather than with the computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}
