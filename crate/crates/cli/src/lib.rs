//! Command-line front end: classification, portraits and cycle reports.

pub mod export;
pub mod report;
pub mod run;

pub use report::{Report, SCHEMA_VERSION};
pub use run::{cmd_classify, cmd_cycles, cmd_portrait, emit, execute, main_with, CliError, Command, Format, RunConfig, SurfaceSource};
