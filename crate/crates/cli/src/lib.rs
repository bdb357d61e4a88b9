//! Command-line layer of octogrid: configuration, the planning campaign and
//! the subcommands of the `octogrid` binary.

pub mod campaign;
pub mod commands;
pub mod config;
