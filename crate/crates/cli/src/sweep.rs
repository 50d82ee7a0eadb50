// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `sweep` verb: a grid of independent training runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uand::svg::LineChart;

use crate::config::SweepSpec;
use crate::error::{CliError, CliResult};
use crate::output::{self, Provenance, THREADS_ENV};
use crate::train::{run_train, ExperimentRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub m: usize,
    pub d: usize,
    pub s: usize,
    pub seed: u64,
    pub run_dir: Option<PathBuf>,
    /// `Err` holds the failure message for this cell.
    pub outcome: Result<ExperimentRecord, String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub cells: Vec<CellResult>,
}

pub const AGGREGATE_HEADER: &str =
    "m,d,s,seed,status,final_loss,eval_loss,baseline_loss,loss_00,loss_01,loss_11,binarity,solution_type,run_dir";

/// Worker count: `UAND_THREADS`, else the configured value, else all cores.
pub fn thread_count(configured: Option<usize>) -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or(configured)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Aggregate rows sorted by `(m, d, s, seed)`; wall-clock time is left out
/// so serial and parallel runs agree.
pub fn aggregate_csv(prov: &Provenance, cells: &[CellResult]) -> String {
    let mut sorted: Vec<&CellResult> = cells.iter().collect();
    sorted.sort_by_key(|c| (c.m, c.d, c.s, c.seed));
    let mut body = String::new();
    for c in sorted {
        let dir = c
            .run_dir
            .as_ref()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match &c.outcome {
            Ok(r) => body.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.m,
                c.d,
                c.s,
                c.seed,
                r.status,
                r.final_loss,
                r.eval_loss,
                r.baseline_loss,
                r.case_loss[0],
                r.case_loss[1],
                r.case_loss[2],
                r.binarity,
                r.solution_type,
                dir
            )),
            Err(msg) => body.push_str(&format!(
                "{},{},{},{},\"error: {}\",,,,,,,,,{}\n",
                c.m,
                c.d,
                c.s,
                c.seed,
                msg.replace('"', "'"),
                dir
            )),
        }
    }
    prov.csv(AGGREGATE_HEADER, &body)
}

fn chart(prov: &Provenance, cells: &[CellResult], title: &str, ylabel: &str, value: impl Fn(&ExperimentRecord) -> f64) -> String {
    let mut series: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for c in cells {
        if let Ok(r) = &c.outcome {
            series.entry((c.m, c.s)).or_default().push((c.d as f64, value(r)));
        }
    }
    let mut chart = LineChart::new(title, "d (neurons)", ylabel).log_axes(true, false);
    for ((m, s), mut points) in series {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        chart.add(format!("m={m} s={s}"), points, false);
    }
    chart.render(Some(&prov.header()))
}

/// Runs every cell of `spec` under `<root>/sweep-<hash>/` with a bounded pool.
/// Cell failures are recorded and do not stop the sweep.
pub fn run_sweep(spec: &SweepSpec, root: &Path) -> CliResult<SweepOutcome> {
    spec.validate()?;
    let prov = Provenance::new(serde_json::to_value(spec).map_err(|e| CliError::Config(e.to_string()))?);
    let dir = root.join(format!("sweep-{}", prov.hash));
    output::create_dir(&dir)?;
    output::write_json(&dir.join("sweep.json"), &prov.config)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(spec.parallelism))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let cells: Vec<CellResult> = pool.install(|| {
        spec.cells()
            .into_par_iter()
            .map(|cell| {
                let p = cell.problem;
                let (run_dir, outcome) = match run_train(&cell, &dir) {
                    Ok(a) => (Some(a.dir), Ok(a.record)),
                    Err(e) => (None, Err(e.to_string())),
                };
                CellResult {
                    m: p.m,
                    d: p.d,
                    s: p.s,
                    seed: p.seed,
                    run_dir,
                    outcome,
                }
            })
            .collect()
    });
    output::write(&dir.join("aggregate.csv"), aggregate_csv(&prov, &cells))?;
    output::write(&dir.join("loss_vs_d.svg"), chart(&prov, &cells, "evaluation loss", "weighted RMS loss", |r| r.eval_loss))?;
    output::write(&dir.join("binarity_vs_d.svg"), chart(&prov, &cells, "binarity of W", "binarity score", |r| r.binarity))?;
    Ok(SweepOutcome { dir, cells })
}
