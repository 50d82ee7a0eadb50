// SPDX-License-Identifier: MIT OR Apache-2.0

//! Labels a model as a binary circuit, an additive circuit, an untouched
//! random compute layer, or none of these.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::binarity_score;
use crate::config::ProblemConfig;
use crate::datagen::{pool_without, sample_conditioned};
use crate::error::Result;
use crate::linalg::fit_line;
use crate::model::{ComputeLayer, Model};
use crate::rng::{self, Domain};
use crate::training::{init_model, InitSpec, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionType {
    BinaryCircuit,
    Additive,
    FrozenLike,
    Other,
}

impl SolutionType {
    pub fn label(self) -> &'static str {
        match self {
            SolutionType::BinaryCircuit => "binary_circuit",
            SolutionType::Additive => "additive",
            SolutionType::FrozenLike => "frozen_like",
            SolutionType::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectOptions {
    pub binarity_threshold: f64,
    /// Minimum R^2 of `z_ij` against `v_i + v_j`.
    pub additive_r2: f64,
    /// Largest relative Frobenius distance from the initial `W` still
    /// counted as unchanged.
    pub frozen_tolerance: f64,
    pub pairs: usize,
    pub samples_per_case: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            binarity_threshold: 0.95,
            additive_r2: 0.95,
            frozen_tolerance: 1e-12,
            pairs: 16,
            samples_per_case: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub kind: SolutionType,
    pub binarity: f64,
    pub additive_r2: f64,
    pub additive_alpha: f64,
    /// `|W - W_0|_F / |W_0|_F` when the initial compute layer is known.
    pub init_distance: Option<f64>,
}

/// Rebuilds the initial compute layer from a model's embedded config:
/// training runs record their init spec, frozen-random builds are their own init.
pub fn recorded_init(model: &Model) -> Option<ComputeLayer> {
    let config = model.metadata.config.as_ref()?;
    let problem: ProblemConfig = serde_json::from_value(config.get("problem")?.clone()).ok()?;
    let init: InitSpec = if let Some(train) = config.get("train") {
        serde_json::from_value::<TrainConfig>(train.clone()).ok()?.init
    } else if model.metadata.construction.as_deref() == Some("frozen_random") {
        serde_json::from_value(config.get("construction")?.clone()).ok()?
    } else {
        return None;
    };
    let drawn = init_model(&problem, &init).ok()?;
    (drawn.compute.weights.dim() == model.compute.weights.dim()).then_some(drawn.compute)
}

fn relative_distance(model: &Model, init: &ComputeLayer) -> Option<f64> {
    if init.weights.dim() != model.compute.weights.dim() {
        return None;
    }
    let diff = (&model.compute.weights - &init.weights).mapv(|x| x * x).sum().sqrt();
    let base = init.weights.mapv(|x| x * x).sum().sqrt();
    Some(if base > 0.0 { diff / base } else { diff })
}

/// Least-squares fit `z_ij ~ alpha (v_i + v_j) + c` pooled over sampled pairs,
/// with the `00`, mixed and `11` cases equally represented.
fn additive_fit(model: &Model, config: &ProblemConfig, opts: &DetectOptions) -> (f64, f64) {
    let m = config.m;
    let mut rng = rng::stream(config.seed, Domain::Analysis, 1 << 48);
    let total_pairs = m * (m - 1);
    let chosen = index::sample(&mut rng, total_pairs, opts.pairs.clamp(1, total_pairs));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for flat in chosen.iter() {
        let i = flat / (m - 1);
        let mut j = flat % (m - 1);
        if j >= i {
            j += 1;
        }
        let pair = (i, j);
        let mut pool = pool_without(m, pair);
        for n in 0..3 * opts.samples_per_case {
            let case = match n % 3 {
                0 => (false, false),
                1 if (n / 3) % 2 == 0 => (true, false),
                1 => (false, true),
                _ => (true, true),
            };
            let pop = usize::from(case.0) + usize::from(case.1);
            if pop > config.s || config.s - pop > pool.len() {
                continue;
            }
            let active = sample_conditioned(&mut pool, pair, case, config.s - pop, &mut rng);
            let z = model.readout_pair(&model.hidden_sparse(&active), i, j);
            xs.push(pop as f64);
            ys.push(z);
        }
    }
    let fit = fit_line(&xs, &ys);
    (fit.slope, if fit.r_squared.is_finite() { fit.r_squared } else { 0.0 })
}

/// Checks, in order: compute layer unchanged from init, additive readout,
/// binary compute layer.
///
/// `init` overrides the initial compute layer reconstructed from metadata.
pub fn detect_solution_type(
    model: &Model,
    config: &ProblemConfig,
    init: Option<&ComputeLayer>,
    opts: &DetectOptions,
) -> Result<Detection> {
    model.validate()?;
    model.check_config(config)?;
    let binarity = binarity_score(&model.compute.weights).score;
    let recorded = if init.is_none() { recorded_init(model) } else { None };
    let init_distance = init.or(recorded.as_ref()).and_then(|w0| relative_distance(model, w0));
    let (additive_alpha, additive_r2) = additive_fit(model, config, opts);
    let kind = if init_distance.is_some_and(|dist| dist <= opts.frozen_tolerance) {
        SolutionType::FrozenLike
    } else if additive_r2 >= opts.additive_r2 {
        SolutionType::Additive
    } else if binarity >= opts.binarity_threshold {
        SolutionType::BinaryCircuit
    } else {
        SolutionType::Other
    };
    Ok(Detection {
        kind,
        binarity,
        additive_r2,
        additive_alpha,
        init_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_binary_circuit, build_frozen_random, BinaryWeightSpec, TruthTable2};
    use crate::model::ReadoutLayer;
    use ndarray::{Array1, Array2};

    #[test]
    fn binary_circuit_is_detected() {
        let config = ProblemConfig::new(12, 300, 3, 0).unwrap();
        let mut circuit = build_binary_circuit(&config, &BinaryWeightSpec::REPRESENTATIVE).unwrap();
        circuit.install_all(&TruthTable2::AND).unwrap();
        let det = detect_solution_type(&circuit.model, &config, None, &DetectOptions::default()).unwrap();
        assert_eq!(det.kind, SolutionType::BinaryCircuit, "{det:?}");
        assert_eq!(det.binarity, 1.0);
        assert!(det.init_distance.is_none());
    }

    #[test]
    fn additive_passthrough_is_detected() {
        let m = 10;
        let alpha = 0.4;
        let mut r = Array2::zeros((m * m, m));
        for i in 0..m {
            for j in 0..m {
                r[[i * m + j, i]] += alpha;
                r[[i * m + j, j]] += alpha;
            }
        }
        let model = Model {
            readout: ReadoutLayer {
                weights: r,
                bias: Array1::zeros(m * m),
            },
            ..Model::from_compute(ComputeLayer {
                weights: Array2::eye(m),
                bias: Array1::zeros(m),
            })
        };
        let config = ProblemConfig::new(m, m, 3, 0).unwrap();
        let det = detect_solution_type(&model, &config, None, &DetectOptions::default()).unwrap();
        assert_eq!(det.kind, SolutionType::Additive);
        assert!((det.additive_alpha - alpha).abs() < 0.1 * alpha);
    }

    #[test]
    fn frozen_random_is_detected_from_metadata() {
        let config = ProblemConfig::new(8, 32, 2, 3).unwrap();
        let model = build_frozen_random(&config, &InitSpec::default()).unwrap();
        let restored = Model::from_json(&model.to_json().unwrap()).unwrap();
        let det = detect_solution_type(&restored, &config, None, &DetectOptions::default()).unwrap();
        assert_eq!(det.kind, SolutionType::FrozenLike);
        assert_eq!(det.init_distance, Some(0.0));
        assert!(det.binarity < 0.95);
    }
}
