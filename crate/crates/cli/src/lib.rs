//! Pipelines, configuration, reports, and theory-verification suites
//! behind the `linklab` command-line tool.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod verify;
pub mod wlbench;

pub use error::{CliError, Result};
