// SPDX-License-Identifier: MIT OR Apache-2.0

//! Configuration-driven experiment harness behind the `uand` binary.
//!
//! Each verb reads one JSON document, writes its artifacts into a directory
//! named by the hash of the resolved configuration, and returns a summary.
//! Every CSV starts with a `# {"version": .., "config": ..}` line and every
//! SVG carries the same text in an XML comment.

pub mod analyze;
pub mod bench;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;
pub mod train;

pub use analyze::{run_analyze, AnalyzeOptions};
pub use bench::run_bench;
pub use config::{BenchConfig, Grid, RunAnalysis, RunConfig, SweepSpec};
pub use error::{CliError, CliResult};
pub use sweep::run_sweep;
pub use train::{run_train, ExperimentRecord};
