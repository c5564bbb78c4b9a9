//! Files, threads and the command line around `svperc_core`.
//!
//! * [`formats`]: the count-table and histogram CSV formats.
//! * [`json`]: report output with 17 significant digits per real.
//! * [`manifest`]: run manifests written beside every output.
//! * [`parallel`]: thread-count-independent enumeration and Monte Carlo.
//! * [`checks`]: the invariant suites behind `svperc check`.
//! * [`cli`]: argument parsing and the subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod error;
pub mod formats;
pub mod json;
pub mod manifest;
pub mod parallel;
mod reports;

pub use error::{CliError, ExitStatus};
