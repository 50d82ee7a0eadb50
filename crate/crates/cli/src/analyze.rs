// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `analyze` verb: measurements on a saved model.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use uand::analysis::{
    binarity_score, detect_solution_type, empirical_class_table, infer_classes, monte_carlo_loss, readout_scatter,
    DetectOptions, Detection, EmpiricalClassTable,
};
use uand::constructions::CASES;
use uand::{compute_loss_weights, Model, ProblemConfig};

use crate::error::{CliError, CliResult};
use crate::output::{self, Provenance};
use crate::train::{binarity_csv, with_provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub pair: (usize, usize),
    /// Overrides the sparsity recorded in the model metadata.
    pub s: Option<usize>,
    pub samples: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            pair: (0, 1),
            s: None,
            samples: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeSummary {
    pub problem: ProblemConfig,
    pub binarity: f64,
    pub detection: Detection,
    pub class_counts: [usize; 4],
    pub non_binary_rows: usize,
    pub eval_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub dir: PathBuf,
    pub summary: AnalyzeSummary,
}

fn problem_of(model: &Model, opts: &AnalyzeOptions) -> CliResult<ProblemConfig> {
    let recorded: Option<ProblemConfig> = model
        .metadata
        .config
        .as_ref()
        .and_then(|c| c.get("problem"))
        .and_then(|p| serde_json::from_value(p.clone()).ok());
    let s = opts.s.or(recorded.map(|p| p.s)).ok_or_else(|| {
        CliError::Config("model metadata has no problem config; pass --s to give the sparsity".into())
    })?;
    let problem = ProblemConfig {
        m: model.inputs(),
        d: model.neurons(),
        s,
        seed: model.metadata.seed,
    };
    problem.validate()?;
    Ok(problem)
}

fn class_table_csv(prov: &Provenance, tables: &[(&str, &EmpiricalClassTable)]) -> String {
    let mut body = String::new();
    for (label, t) in tables {
        for (case, (vi, vj)) in CASES.iter().enumerate() {
            let v = t.table.values[case];
            let e = t.std_errors[case];
            body.push_str(&format!(
                "{label},{},{},{},{},{},{},{},{},{},{}\n",
                u8::from(*vi),
                u8::from(*vj),
                v[0],
                v[1],
                v[2],
                v[3],
                e[0],
                e[1],
                e[2],
                e[3]
            ));
        }
    }
    prov.csv("interference,vi,vj,A,B1,B2,C,se_A,se_B1,se_B2,se_C", &body)
}

pub fn run_analyze(model_path: &Path, opts: &AnalyzeOptions, root: &Path) -> CliResult<AnalyzeOutcome> {
    let text = fs::read_to_string(model_path).map_err(|e| CliError::io(model_path, e))?;
    let model = Model::from_json(&text)?;
    model.validate()?;
    let problem = problem_of(&model, opts)?;
    let (i, j) = opts.pair;
    if i >= problem.m || j >= problem.m || i == j {
        return Err(CliError::Config(format!("pair ({i}, {j}) is not an off-diagonal pair for m={}", problem.m)));
    }
    let prov = Provenance::new(json!({
        "model_hash": output::config_hash(&serde_json::Value::String(text)),
        "model_config": model.metadata.config,
        "problem": problem,
        "analysis": opts,
    }));
    let dir = root.join(format!("analyze-{}", prov.hash));
    output::create_dir(&dir)?;

    let report = binarity_score(&model.compute.weights);
    output::write(&dir.join("binarity.csv"), binarity_csv(&prov, &report))?;
    let scatter = readout_scatter(&model, opts.pair)?;
    output::write(&dir.join("scatter.csv"), with_provenance(&prov, &scatter.to_csv()))?;
    output::write(&dir.join("scatter.svg"), scatter.to_svg(Some(&prov.header())))?;

    let inferred = infer_classes(&model.compute.weights, opts.pair)?;
    let noiseless = empirical_class_table(&model, &problem, opts.pair, &inferred.classes, 1, false)?;
    let noisy = empirical_class_table(&model, &problem, opts.pair, &inferred.classes, opts.samples, true)?;
    output::write(
        &dir.join("class_table.csv"),
        class_table_csv(&prov, &[("none", &noiseless), ("sampled", &noisy)]),
    )?;

    let detection = detect_solution_type(&model, &problem, None, &DetectOptions::default())?;
    let eval_loss = compute_loss_weights(&problem)
        .ok()
        .and_then(|w| monte_carlo_loss(&model, &problem, &w, opts.samples, 0).ok())
        .map(|e| e.loss);
    let summary = AnalyzeSummary {
        problem,
        binarity: report.score,
        detection,
        class_counts: inferred.counts(),
        non_binary_rows: inferred.non_binary_rows.len(),
        eval_loss,
    };
    output::write_json(
        &dir.join("summary.json"),
        &json!({ "version": output::VERSION, "config": prov.config, "summary": summary }),
    )?;
    Ok(AnalyzeOutcome { dir, summary })
}
