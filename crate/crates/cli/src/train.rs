// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `train` verb: one training run and its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use uand::analysis::{binarity_score, detect_solution_type, monte_carlo_loss, readout_scatter, BinarityReport};
use uand::loss::{baseline_additive_loss, compute_loss_weights_with};
use uand::svg::LineChart;
use uand::training::{self, EpochRecord};
use uand::{Error, Model};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: Value,
    pub version: String,
    pub status: String,
    /// Weighted RMS objective over the last epoch.
    pub final_loss: f64,
    /// Weighted RMS loss on fresh evaluation samples.
    pub eval_loss: f64,
    pub eval_loss_std_error: f64,
    pub baseline_loss: f64,
    /// Unweighted RMS error for cases `00`, `01`, `11` over the last epoch.
    pub case_loss: [f64; 3],
    pub binarity: f64,
    pub solution_type: String,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub dir: PathBuf,
    pub record: ExperimentRecord,
    pub model: Model,
}

pub fn resolved(cfg: &RunConfig) -> CliResult<Value> {
    serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))
}

pub fn history_csv(prov: &Provenance, history: &[EpochRecord]) -> String {
    let mut body = String::new();
    for r in history {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.epoch, r.loss, r.binarity, r.case_loss[0], r.case_loss[1], r.case_loss[2]
        ));
    }
    prov.csv("epoch,loss,binarity,loss_00,loss_01,loss_11", &body)
}

pub fn binarity_csv(prov: &Provenance, report: &BinarityReport) -> String {
    let mut body = String::new();
    for (k, n) in report.neurons.iter().enumerate() {
        body.push_str(&format!("{k},{},{},{},{}\n", n.upper, n.lower, n.upper_fraction, n.deviation_q90));
    }
    prov.csv("neuron,upper,lower,upper_fraction,deviation_q90", &body)
}

/// Inserts the provenance comment above an existing CSV header row.
pub fn with_provenance(prov: &Provenance, csv: &str) -> String {
    let (head, body) = csv.split_once('\n').unwrap_or((csv, ""));
    prov.csv(head, body)
}

fn loss_chart(prov: &Provenance, history: &[EpochRecord], baseline: f64) -> String {
    let mut chart = LineChart::new("training loss", "epoch", "weighted RMS loss").log_axes(false, true);
    chart.add("loss", history.iter().map(|r| (r.epoch as f64, r.loss)).collect(), false);
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        chart.add("additive baseline", vec![(first.epoch as f64, baseline), (last.epoch as f64, baseline)], true);
    }
    chart.render(Some(&prov.header()))
}

fn write_model(path: &Path, model: &Model) -> CliResult<()> {
    let mut model = model.clone();
    model.metadata.version = output::VERSION.to_owned();
    output::write(path, model.to_json()? + "\n")
}

/// Trains `cfg` into `<root>/run-<hash>/`.
///
/// On divergence the history so far and the last finite model are written
/// before the numeric error is returned.
pub fn run_train(cfg: &RunConfig, root: &Path) -> CliResult<TrainArtifacts> {
    cfg.validate()?;
    let start = Instant::now();
    let prov = Provenance::new(resolved(cfg)?);
    let dir = root.join(format!("run-{}", prov.hash));
    output::create_dir(&dir)?;
    output::write_json(&dir.join("config.json"), &prov.config)?;

    let problem = cfg.problem;
    let weights = compute_loss_weights_with(&problem, &cfg.train.loss_weights)?;
    let baseline = baseline_additive_loss(&problem, &weights);
    let outcome = match training::train(&problem, &cfg.train) {
        Ok(outcome) => outcome,
        Err(Error::Diverged(run)) => {
            output::write(&dir.join("history.csv"), history_csv(&prov, &run.history))?;
            write_model(&dir.join("model_diverged.json"), &run.model)?;
            let last = run.history.last();
            let record = ExperimentRecord {
                config: prov.config.clone(),
                version: output::VERSION.to_owned(),
                status: format!("diverged at epoch {} batch {}", run.epoch, run.batch),
                final_loss: f64::NAN,
                eval_loss: f64::NAN,
                eval_loss_std_error: f64::NAN,
                baseline_loss: baseline,
                case_loss: last.map_or([f64::NAN; 3], |r| r.case_loss),
                binarity: binarity_score(&run.model.compute.weights).score,
                solution_type: "diverged".into(),
                wall_seconds: start.elapsed().as_secs_f64(),
            };
            output::write_json(&dir.join("record.json"), &record)?;
            return Err(CliError::Numeric(format!(
                "training diverged at epoch {}, batch {}; partial artifacts in {}",
                run.epoch,
                run.batch,
                dir.display()
            )));
        }
        Err(other) => return Err(other.into()),
    };
    let model = outcome.model;
    write_model(&dir.join("model.json"), &model)?;
    output::write(&dir.join("history.csv"), history_csv(&prov, &outcome.history))?;
    output::write(&dir.join("loss.svg"), loss_chart(&prov, &outcome.history, baseline))?;

    let report = binarity_score(&model.compute.weights);
    output::write(&dir.join("binarity.csv"), binarity_csv(&prov, &report))?;
    let scatter = readout_scatter(&model, cfg.analysis.scatter_pair)?;
    output::write(&dir.join("scatter.csv"), with_provenance(&prov, &scatter.to_csv()))?;
    output::write(&dir.join("scatter.svg"), scatter.to_svg(Some(&prov.header())))?;

    let eval = monte_carlo_loss(&model, &problem, &weights, cfg.analysis.eval_samples, 0)?;
    let detection = detect_solution_type(&model, &problem, Some(&outcome.initial_compute), &cfg.analysis.detect)?;
    output::write_json(&dir.join("detection.json"), &detection)?;
    let last = outcome.history.last();
    let record = ExperimentRecord {
        config: prov.config.clone(),
        version: output::VERSION.to_owned(),
        status: "ok".into(),
        final_loss: last.map_or(f64::NAN, |r| r.loss),
        eval_loss: eval.loss,
        eval_loss_std_error: eval.mean_sq_std_error / (2.0 * eval.loss.max(f64::MIN_POSITIVE)),
        baseline_loss: baseline,
        case_loss: last.map_or([f64::NAN; 3], |r| r.case_loss),
        binarity: report.score,
        solution_type: detection.kind.label().into(),
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_json(&dir.join("record.json"), &record)?;
    Ok(TrainArtifacts { dir, record, model })
}
