//! Command-line front end: configuration, output handling and commands.

pub mod commands;
pub mod config;
pub mod output;
