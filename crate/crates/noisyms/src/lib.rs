//! Std companion of `noisyms-core`: alist files, TOML configs, CSV/JSON
//! outputs with run manifests, parallel runners and the `noisyms` command
//! line.

pub mod cli;
pub mod commands;
pub mod config;
pub mod graphio;
pub mod output;
pub mod params;
pub mod runner;
