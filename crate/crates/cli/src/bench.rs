// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `bench` verb: binary, CiS and frozen-random constructions side by side.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uand::analysis::{
    calibrate_beta, crossover_predicate, exhaustive_loss, monte_carlo_loss, pair_output_variance, theory_var_binary,
    theory_var_cis, LossEstimate, PairErrorStats,
};
use uand::constructions::{
    build_binary_circuit, build_cis_construction, build_frozen_random, fit_pair_readout, TruthTable2,
};
use uand::linalg::fit_line;
use uand::svg::LineChart;
use uand::{compute_loss_weights, Model, ProblemConfig};

use crate::config::BenchConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, Provenance};

pub const COMPARISON_HEADER: &str = "model,status,mc_loss,mc_mean_sq_std_error,exhaustive_loss,mc_within_3se,pair_balanced_mse,pair_output_var,theory_var,theory_beta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub status: String,
    pub mc: Option<LossEstimate>,
    pub exhaustive: Option<LossEstimate>,
    pub mc_within_3se: Option<bool>,
    /// Case-balanced MSE of the probed pairs: `(e00 + (e01 + e10)/2 + e11) / 3`.
    pub pair_balanced_mse: Option<f64>,
    /// Mean within-case output variance of the probed pairs.
    pub pair_output_var: Option<f64>,
    pub theory_var: Option<f64>,
    pub theory_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: String,
    pub points: Vec<(usize, f64)>,
    /// Slope of `log var` against `log d`.
    pub exponent: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub scaling: Vec<ScalingFit>,
    pub crossover_predicate: bool,
    /// Which of binary and CiS had the lower probed output variance.
    pub empirical_lower_variance: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub dir: PathBuf,
    pub summary: BenchSummary,
}

/// Up to `n` distinct off-diagonal pairs, evenly spaced in row-major order.
pub fn probe_pairs(m: usize, n: usize) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let n = n.min(all.len());
    (0..n).map(|k| all[k * all.len() / n]).collect()
}

fn pair_summary(stats: &[PairErrorStats]) -> (f64, f64) {
    let n = stats.len().max(1) as f64;
    let balanced = stats
        .iter()
        .map(|s| (s.case_mse[0] + 0.5 * (s.case_mse[1] + s.case_mse[2]) + s.case_mse[3]) / 3.0)
        .sum::<f64>()
        / n;
    let var = stats.iter().map(PairErrorStats::mean_case_var).sum::<f64>() / n;
    (balanced, var)
}

fn probe(model: &Model, problem: &ProblemConfig, pairs: &[(usize, usize)], samples: usize) -> uand::Result<Vec<PairErrorStats>> {
    pairs
        .iter()
        .map(|&p| pair_output_variance(model, problem, p, &TruthTable2::AND, samples))
        .collect()
}

struct Built {
    model: Model,
    /// Whether every pair carries a readout, so the full loss is meaningful.
    complete: bool,
    theory: Option<(f64, f64)>,
}

fn build(kind: &str, cfg: &BenchConfig, problem: &ProblemConfig, pairs: &[(usize, usize)]) -> uand::Result<Built> {
    let (s, d) = (problem.s, problem.d as f64);
    match kind {
        "binary" => {
            let spec = &cfg.binary;
            let mut circuit = build_binary_circuit(problem, spec)?;
            circuit.install_all(&TruthTable2::AND)?;
            let beta = calibrate_beta(spec.upper, spec.lower, spec.p, s, 0.0);
            let theory = beta.map(|b| (theory_var_binary(s as f64, d, spec.p, spec.upper, spec.lower, b), b));
            Ok(Built {
                model: circuit.model,
                complete: true,
                theory,
            })
        }
        "cis" => {
            let cis = build_cis_construction(problem, &cfg.cis)?;
            let beta = calibrate_beta(1.0, 0.0, cis.p, s, 0.0);
            let theory = beta.filter(|_| cis.p < 1.0).map(|b| (theory_var_cis(s as f64, d, cis.p, b), b));
            Ok(Built {
                model: cis.model,
                complete: true,
                theory,
            })
        }
        _ => {
            let mut model = build_frozen_random(problem, &cfg.frozen_init)?;
            let all = problem.m * (problem.m - 1);
            let fit_all = all <= pairs.len();
            let fitted: Vec<(usize, usize)> = if fit_all {
                (0..problem.m)
                    .flat_map(|i| (0..problem.m).filter(move |&j| j != i).map(move |j| (i, j)))
                    .collect()
            } else {
                pairs.to_vec()
            };
            for &p in &fitted {
                fit_pair_readout(&model, problem, p, &cfg.probe)?.install(&mut model, p);
            }
            Ok(Built {
                model,
                complete: fit_all,
                theory: None,
            })
        }
    }
}

const MODELS: [&str; 3] = ["binary", "cis", "frozen_random"];

fn bench_row(kind: &str, cfg: &BenchConfig, pairs: &[(usize, usize)]) -> BenchRow {
    let problem = &cfg.problem;
    let mut row = BenchRow {
        model: kind.into(),
        status: "ok".into(),
        mc: None,
        exhaustive: None,
        mc_within_3se: None,
        pair_balanced_mse: None,
        pair_output_var: None,
        theory_var: None,
        theory_beta: None,
    };
    let result = (|| -> uand::Result<()> {
        let built = build(kind, cfg, problem, pairs)?;
        row.theory_var = built.theory.map(|t| t.0);
        row.theory_beta = built.theory.map(|t| t.1);
        let stats = probe(&built.model, problem, pairs, cfg.variance_samples_per_case)?;
        let (balanced, var) = pair_summary(&stats);
        row.pair_balanced_mse = Some(balanced);
        row.pair_output_var = Some(var);
        if built.complete {
            let weights = compute_loss_weights(problem)?;
            let mc = monte_carlo_loss(&built.model, problem, &weights, cfg.eval_samples, 0)?;
            row.mc = Some(mc);
            if problem.m <= cfg.exhaustive_max_m {
                let ex = exhaustive_loss(&built.model, problem, &weights)?;
                row.mc_within_3se = Some((mc.mean_sq - ex.mean_sq).abs() <= 3.0 * mc.mean_sq_std_error + 1e-15);
                row.exhaustive = Some(ex);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = format!("error: {e}");
    }
    row
}

fn scaling(kind: &str, cfg: &BenchConfig, pairs: &[(usize, usize)]) -> ScalingFit {
    let mut fit = ScalingFit {
        model: kind.into(),
        points: Vec::new(),
        exponent: None,
        failures: Vec::new(),
    };
    for &d in &cfg.d_grid {
        let problem = ProblemConfig { d, ..cfg.problem };
        let measured = build(kind, cfg, &problem, pairs).and_then(|b| probe(&b.model, &problem, pairs, cfg.variance_samples_per_case));
        match measured {
            Ok(stats) => fit.points.push((d, pair_summary(&stats).1)),
            Err(e) => fit.failures.push(format!("d={d}: {e}")),
        }
    }
    let usable: Vec<(f64, f64)> = fit
        .points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(d, v)| ((d as f64).ln(), v.ln()))
        .collect();
    if usable.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
        fit.exponent = Some(fit_line(&xs, &ys).slope);
    }
    fit
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn comparison_csv(prov: &Provenance, rows: &[BenchRow]) -> String {
    let mut body = String::new();
    for r in rows {
        body.push_str(&format!(
            "{},\"{}\",{},{},{},{},{},{},{},{}\n",
            r.model,
            r.status.replace('"', "'"),
            opt(r.mc.map(|e| e.loss)),
            opt(r.mc.map(|e| e.mean_sq_std_error)),
            opt(r.exhaustive.map(|e| e.loss)),
            r.mc_within_3se.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.pair_balanced_mse),
            opt(r.pair_output_var),
            opt(r.theory_var),
            opt(r.theory_beta),
        ));
    }
    prov.csv(COMPARISON_HEADER, &body)
}

pub fn run_bench(cfg: &BenchConfig, root: &Path) -> CliResult<BenchOutcome> {
    cfg.validate()?;
    let prov = Provenance::new(serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?);
    let dir = root.join(format!("bench-{}", prov.hash));
    output::create_dir(&dir)?;
    output::write_json(&dir.join("config.json"), &prov.config)?;
    let pairs = probe_pairs(cfg.problem.m, cfg.probe_pairs);

    let rows: Vec<BenchRow> = MODELS.iter().map(|k| bench_row(k, cfg, &pairs)).collect();
    output::write(&dir.join("comparison.csv"), comparison_csv(&prov, &rows))?;

    let fits: Vec<ScalingFit> = MODELS.iter().map(|k| scaling(k, cfg, &pairs)).collect();
    let mut body = String::new();
    let mut chart = LineChart::new("output variance against d", "d (neurons)", "mean within-case variance").log_axes(true, true);
    for f in &fits {
        for (d, v) in &f.points {
            body.push_str(&format!("{},{d},{v}\n", f.model));
        }
        chart.add(
            format!("{} (slope {})", f.model, f.exponent.map_or("n/a".into(), |e| format!("{e:.2}"))),
            f.points.iter().map(|&(d, v)| (d as f64, v)).collect(),
            false,
        );
    }
    output::write(&dir.join("scaling.csv"), prov.csv("model,d,output_var", &body))?;
    output::write(&dir.join("scaling.svg"), chart.render(Some(&prov.header())))?;

    let var_of = |name: &str| rows.iter().find(|r| r.model == name).and_then(|r| r.pair_output_var);
    let empirical_lower_variance = match (var_of("binary"), var_of("cis")) {
        (Some(b), Some(c)) => Some(if b < c { "binary" } else { "cis" }.to_owned()),
        _ => None,
    };
    let summary = BenchSummary {
        rows,
        scaling: fits,
        crossover_predicate: cfg.problem.m >= 3
            && crossover_predicate(cfg.problem.s as f64, cfg.problem.d as f64, cfg.problem.m as f64),
        empirical_lower_variance,
    };
    output::write_json(
        &dir.join("summary.json"),
        &serde_json::json!({ "version": output::VERSION, "config": prov.config, "summary": summary }),
    )?;
    Ok(BenchOutcome { dir, summary })
}
