//! Command-line front end for `plap-core`: run configuration, file formats,
//! a rayon executor and the command implementations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod exec;
pub mod io;
pub mod properties;

pub use commands::{run, Command, Outcome};
pub use config::{ConfigError, RawConfig, RunConfig};
pub use exec::RayonExecutor;
