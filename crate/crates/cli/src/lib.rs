//! Batch front door for the curvature library: problem-file loading, the
//! five subcommands, and the two output formats.

pub mod commands;
pub mod error;
pub mod problem;
pub mod render;

pub use error::{CliError, Result};
