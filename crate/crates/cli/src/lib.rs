//! Command-line companion to `scorepath-core`: JSON configs, CSV/JSON file
//! formats, built-in SVG plots, and the subcommand implementations.

pub mod config;
pub mod io;
pub mod run;
pub mod svg;

/// CLI-level results carry rendered error messages.
pub type CliResult<T> = Result<T, String>;
