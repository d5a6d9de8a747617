//! Scenario runner for the wavelab solver: configuration parsing, the
//! subcommand implementations and their CSV and plot-script outputs.

pub mod commands;
pub mod config;
pub mod output;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WAVELAB_OUT_DIR";
