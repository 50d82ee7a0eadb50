// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uand_cli::output::{output_root, read_config};
use uand_cli::{run_analyze, run_bench, run_sweep, run_train, AnalyzeOptions, BenchConfig, CliResult, RunConfig, SweepSpec};

/// Universal-AND experiments: training, sweeps, construction benchmarks.
///
/// Output goes to $UAND_OUT_DIR, else the config's `output_dir`, else
/// ./uand-out. $UAND_THREADS bounds the sweep worker pool.
#[derive(Debug, Parser)]
#[command(name = "uand", version = env!("UAND_BUILD_VERSION"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model from a run config.
    Train { config: PathBuf },
    /// Train every cell of a d x s (x m x seed) grid.
    Sweep { config: PathBuf },
    /// Compare the binary, CiS and frozen-random constructions.
    Bench { config: PathBuf },
    /// Measure a saved model.
    Analyze {
        model: PathBuf,
        /// Output pair for the scatter and class tables.
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        pair: Option<Vec<usize>>,
        /// Sparsity, when the model metadata does not record it.
        #[arg(long)]
        s: Option<usize>,
        /// Monte-Carlo samples per estimate.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },
}

fn print(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default());
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { config } => {
            let cfg: RunConfig = read_config(&config)?;
            let out = run_train(&cfg, &output_root(cfg.output_dir.as_deref()))?;
            print(serde_json::json!({ "dir": out.dir, "record": out.record }));
        }
        Command::Sweep { config } => {
            let spec: SweepSpec = read_config(&config)?;
            let out = run_sweep(&spec, &output_root(spec.output_dir.as_deref()))?;
            let failed = out.cells.iter().filter(|c| c.outcome.is_err()).count();
            print(serde_json::json!({ "dir": out.dir, "cells": out.cells.len(), "failed": failed }));
        }
        Command::Bench { config } => {
            let cfg: BenchConfig = read_config(&config)?;
            let out = run_bench(&cfg, &output_root(cfg.output_dir.as_deref()))?;
            print(serde_json::json!({ "dir": out.dir, "summary": out.summary }));
        }
        Command::Analyze { model, pair, s, samples } => {
            let pair = pair.map_or((0, 1), |p| (p[0], p[1]));
            let out = run_analyze(&model, &AnalyzeOptions { pair, s, samples }, &output_root(None))?;
            print(serde_json::json!({ "dir": out.dir, "summary": out.summary }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uand: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
