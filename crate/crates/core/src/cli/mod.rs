//! Experiment configuration, command orchestration and file output for the
//! `wkbwave` binary.

pub mod config;
pub mod output;

mod commands;

pub use commands::{configure_threads, run, CliError, Command, THREADS_ENV};
