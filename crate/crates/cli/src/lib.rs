//! System-file ingestion, analysis commands and report emission for the
//! `dirac` tool.

pub mod commands;
pub mod report;
pub mod system;

pub use commands::{CliError, CliResult, Options};
pub use report::{Format, Report};
pub use system::{load_system, parse_system, SystemError, SystemSpec};
