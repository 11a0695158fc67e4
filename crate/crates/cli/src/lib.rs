//! Batch command surface over `crawford-core`: JSON in, JSON or CSV out.
//!
//! Exit codes: 0 success, 1 `verify` found a violated invariant, 2 bad
//! input, 3 numerical failure.

pub mod commands;
pub mod error;
pub mod verify;

pub use error::{CliError, CliResult};
