//! Command-line driver for the price formation solvers: configuration,
//! CSV input and output, and the simulate / check / validate / sweep
//! commands.

// `!(x > y)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use error::{CliError, Result};
