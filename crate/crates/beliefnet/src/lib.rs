//! File formats, configuration and parallel orchestration around
//! `beliefnet-core`, plus the `beliefnet` command-line tool.
//!
//! * [`dump`]: the plain-text network format.
//! * [`config`]: TOML run configurations with `key=value` overrides.
//! * [`output`]: CSV and JSON writers.
//! * [`runner`]: parallel, order-preserving execution of figure presets.
//! * [`cli`]: the `run`, `experiment` and `analyze` subcommands.

pub mod cli;
pub mod config;
pub mod dump;
pub mod output;
pub mod runner;
