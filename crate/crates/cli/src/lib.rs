//! Command-line front end for `spikeforge-core`: configuration files, file
//! formats and the experiment drivers behind each subcommand.

pub mod config;
pub mod experiment;
pub mod formats;
