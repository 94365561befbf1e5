//! Command-line front end for regular vine copulas.
//!
//! The binary `rvine` wraps [`commands::run`]; the modules are public so the
//! tests can drive the same code paths without spawning processes.

pub mod commands;
pub mod error;
pub mod model_file;
pub mod pit;
pub mod study;
pub mod table;

pub use error::{CliError, CliResult};
