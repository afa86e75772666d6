//! Experiment plumbing for the `bootlab` command-line tool.

pub mod commands;
pub mod output;
pub mod render;
pub mod report;
pub mod spec;

pub use commands::{run, CliError, RunOutput};
pub use spec::{CommandKind, ExperimentSpec, Format};
