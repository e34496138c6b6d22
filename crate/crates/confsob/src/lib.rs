//! File formats, reports and the command-line driver for [`confsob_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod init;
pub mod io;
pub mod suites;

/// Error type of the std layer.
pub type BoxError = Box<dyn std::error::Error + Send + Sync>;
