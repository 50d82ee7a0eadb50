// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON configuration documents for each verb.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use uand::analysis::DetectOptions;
use uand::constructions::{BinaryWeightSpec, CisConfig, ProbeConfig};
use uand::training::{InitSpec, TrainConfig};
use uand::ProblemConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunAnalysis {
    /// Pair drawn in the readout scatter.
    pub scatter_pair: (usize, usize),
    /// Fresh samples for the post-training loss estimate.
    pub eval_samples: usize,
    pub detect: DetectOptions,
}

impl Default for RunAnalysis {
    fn default() -> Self {
        Self {
            scatter_pair: (0, 1),
            eval_samples: 2048,
            detect: DetectOptions::default(),
        }
    }
}

/// `train` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub analysis: RunAnalysis,
    /// Not part of the run identity.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

fn pair_ok(pair: (usize, usize), m: usize) -> bool {
    pair.0 < m && pair.1 < m && pair.0 != pair.1
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.problem.validate()?;
        self.train.validate()?;
        if !pair_ok(self.analysis.scatter_pair, self.problem.m) {
            return Err(CliError::Config(format!(
                "analysis.scatter_pair {:?} is not an off-diagonal pair for m={}",
                self.analysis.scatter_pair, self.problem.m
            )));
        }
        if self.analysis.eval_samples == 0 {
            return Err(CliError::Config("analysis.eval_samples must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub d: Vec<usize>,
    pub s: Vec<usize>,
    #[serde(default)]
    pub m: Option<Vec<usize>>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

/// `sweep` document: every grid cell is a `train` run built from `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub grid: Grid,
    /// Worker threads; `UAND_THREADS` takes precedence.
    #[serde(default, skip_serializing)]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.grid.d.is_empty() || self.grid.s.is_empty() {
            return Err(CliError::Config("grid.d and grid.s must be non-empty".into()));
        }
        if self.grid.m.as_ref().is_some_and(Vec::is_empty) || self.grid.seeds.as_ref().is_some_and(Vec::is_empty) {
            return Err(CliError::Config("grid.m and grid.seeds must be non-empty when given".into()));
        }
        if self.parallelism == Some(0) {
            return Err(CliError::Config("parallelism must be at least 1".into()));
        }
        self.base.train.validate()?;
        Ok(())
    }

    /// Grid cells in `(m, d, s, seed)` lexicographic order.
    pub fn cells(&self) -> Vec<RunConfig> {
        let ms = self.grid.m.clone().unwrap_or_else(|| vec![self.base.problem.m]);
        let seeds = self.grid.seeds.clone().unwrap_or_else(|| vec![self.base.problem.seed]);
        let mut cells = Vec::new();
        for &m in &ms {
            for &d in &self.grid.d {
                for &s in &self.grid.s {
                    for &seed in &seeds {
                        let mut cell = self.base.clone();
                        cell.problem = ProblemConfig { m, d, s, seed };
                        cell.output_dir = None;
                        cells.push(cell);
                    }
                }
            }
        }
        cells
    }
}

/// `bench` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub problem: ProblemConfig,
    pub binary: BinaryWeightSpec,
    pub cis: CisConfig,
    /// Compute-layer distribution of the frozen-random model.
    pub frozen_init: InitSpec,
    pub probe: ProbeConfig,
    /// Pairs given least-squares readouts and per-pair error estimates.
    pub probe_pairs: usize,
    pub eval_samples: usize,
    pub variance_samples_per_case: usize,
    /// Neuron counts for the variance-scaling regression.
    pub d_grid: Vec<usize>,
    /// `m` up to which losses are also computed by enumeration.
    pub exhaustive_max_m: usize,
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                m: 100,
                d: 1000,
                s: 3,
                seed: 0,
            },
            binary: BinaryWeightSpec::REPRESENTATIVE,
            cis: CisConfig::default(),
            frozen_init: InitSpec::default(),
            probe: ProbeConfig::default(),
            probe_pairs: 4,
            eval_samples: 2048,
            variance_samples_per_case: 2000,
            d_grid: vec![128, 256, 512, 1024],
            exhaustive_max_m: 12,
            output_dir: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.problem.validate()?;
        self.binary.validate()?;
        if self.probe_pairs == 0 || self.eval_samples == 0 || self.variance_samples_per_case < 2 {
            return Err(CliError::Config(
                "probe_pairs and eval_samples must be positive, variance_samples_per_case at least 2".into(),
            ));
        }
        if self.d_grid.iter().any(|&d| d == 0) {
            return Err(CliError::Config("d_grid entries must be positive".into()));
        }
        Ok(())
    }
}
