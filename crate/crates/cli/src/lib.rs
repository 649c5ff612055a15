//! Command-line front end for the `vorproc` simulator: run configuration,
//! subcommands, and the text and raster output formats.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;
