// SPDX-License-Identifier: MIT OR Apache-2.0

//! Gradient training of the two-layer model.

mod backward;
mod optimizer;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use backward::{backward, GradientBundle, Real};
pub use optimizer::OptimizerKind;

use backward::{forward_backward, Params, PassOptions, Workspace};
use optimizer::{Optimizer, StepMask};

use crate::analysis::binarity::binarity_score;
use crate::config::ProblemConfig;
use crate::datagen::sample_batch;
use crate::error::{Error, Result};
use crate::loss::{compute_loss_weights_with, CaseErrors, WeightOverrides};
use crate::model::{ComputeLayer, Model, ModelMetadata, ModelOrigin, ReadoutLayer};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitFamily {
    #[default]
    Uniform,
    Normal,
}

/// Initial parameter distribution. Uniform draws from `[-scale, scale]`,
/// normal uses `scale` as the standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitSpec {
    pub family: InitFamily,
    /// Defaults to `1/sqrt(m)`.
    pub w_scale: Option<f64>,
    /// Defaults to `1/sqrt(d)`.
    pub r_scale: Option<f64>,
    pub b_scale: f64,
    pub c_scale: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            family: InitFamily::Uniform,
            w_scale: None,
            r_scale: None,
            b_scale: 0.0,
            c_scale: 0.0,
        }
    }
}

impl InitSpec {
    /// Zero scales are allowed; they give degenerate constant layers.
    pub fn validate(&self) -> Result<()> {
        let scales = [
            self.w_scale.unwrap_or(1.0),
            self.r_scale.unwrap_or(1.0),
            self.b_scale,
            self.c_scale,
        ];
        if scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::config("init scales must be finite and nonnegative"));
        }
        Ok(())
    }

    fn fill<R: Rng>(&self, shape: (usize, usize), scale: f64, rng: &mut R) -> Array2<f64> {
        if scale == 0.0 {
            return Array2::zeros(shape);
        }
        match self.family {
            InitFamily::Uniform => Array2::from_shape_simple_fn(shape, || rng.gen_range(-scale..=scale)),
            InitFamily::Normal => {
                let normal = Normal::new(0.0, scale).expect("validated scale");
                Array2::from_shape_simple_fn(shape, || normal.sample(rng))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub freeze_compute: bool,
    /// Whether the readout bias `c` is trained.
    pub train_readout_bias: bool,
    pub optimizer: OptimizerKind,
    pub init: InitSpec,
    pub precision: Precision,
    pub loss_weights: WeightOverrides,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batches_per_epoch: 100,
            batch_size: 256,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            freeze_compute: false,
            train_readout_bias: true,
            optimizer: OptimizerKind::default(),
            init: InitSpec::default(),
            precision: Precision::F64,
            loss_weights: WeightOverrides::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batches_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::config("epochs, batches_per_epoch and batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::config("weight_decay must be nonnegative"));
        }
        if let OptimizerKind::Adam { beta1, beta2, eps } = self.optimizer {
            let ok = (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0;
            if !ok {
                return Err(Error::config("adam requires 0 <= beta < 1 and eps > 0"));
            }
        }
        self.init.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// RMS of the weighted objective averaged over the epoch's batches.
    pub loss: f64,
    pub binarity: f64,
    /// Unweighted RMS error for cases `00`, `01`, `11`.
    pub case_loss: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<EpochRecord>,
    pub initial_compute: ComputeLayer,
}

/// State at the point where the loss became non-finite.
#[derive(Debug, Clone)]
pub struct DivergedRun {
    pub epoch: usize,
    pub batch: usize,
    pub history: Vec<EpochRecord>,
    pub model: Model,
}

/// Draws `W`, `b`, `R`, `c` from `init`. Each tensor uses its own stream so
/// a frozen-random build shares `W`, `b` with a training run of the same seed.
pub fn init_model(config: &ProblemConfig, init: &InitSpec) -> Result<Model> {
    config.validate()?;
    init.validate()?;
    let (m, d) = (config.m, config.d);
    let w_scale = init.w_scale.unwrap_or(1.0 / (m as f64).sqrt());
    let r_scale = init.r_scale.unwrap_or(1.0 / (d as f64).sqrt());
    let seed = config.seed;
    let weights = init.fill((d, m), w_scale, &mut rng::stream(seed, Domain::Init, 0));
    let bias = init.fill((1, d), init.b_scale, &mut rng::stream(seed, Domain::Init, 1));
    let readout = init.fill((m * m, d), r_scale, &mut rng::stream(seed, Domain::Init, 2));
    let readout_bias = init.fill((1, m * m), init.c_scale, &mut rng::stream(seed, Domain::Init, 3));
    Ok(Model {
        compute: ComputeLayer {
            weights,
            bias: Array1::from(bias.into_raw_vec_and_offset().0),
        },
        readout: ReadoutLayer {
            weights: readout,
            bias: Array1::from(readout_bias.into_raw_vec_and_offset().0),
        },
        metadata: ModelMetadata {
            seed,
            ..ModelMetadata::default()
        },
    })
}

pub fn train(config: &ProblemConfig, tc: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    tc.validate()?;
    let mut model = init_model(config, &tc.init)?;
    model.metadata = ModelMetadata {
        seed: config.seed,
        origin: ModelOrigin::Trained,
        construction: None,
        config: Some(serde_json::json!({ "problem": config, "train": tc })),
        version: env!("CARGO_PKG_VERSION").to_owned(),
    };
    train_from(config, tc, model)
}

/// Trains starting from an explicit model (its shapes must match `config`).
pub fn train_from(config: &ProblemConfig, tc: &TrainConfig, model: Model) -> Result<TrainOutcome> {
    model.validate()?;
    model.check_config(config)?;
    match tc.precision {
        Precision::F32 => run::<f32>(config, tc, model),
        Precision::F64 => run::<f64>(config, tc, model),
    }
}

fn run<T: Real>(config: &ProblemConfig, tc: &TrainConfig, mut model: Model) -> Result<TrainOutcome> {
    let weights = compute_loss_weights_with(config, &tc.loss_weights)?;
    let initial_compute = model.compute.clone();
    let mut params = Params::<T>::from_model(&model);
    let mut grads = params.zeros_like();
    let mut ws = Workspace::<T>::new(tc.batch_size, config.m, config.d);
    let mut opt = Optimizer::new(tc.optimizer, tc.learning_rate, tc.weight_decay, &params);
    let mask = StepMask {
        compute: !tc.freeze_compute,
        readout_bias: tc.train_readout_bias,
    };
    let mut history = Vec::with_capacity(tc.epochs);

    for epoch in 0..tc.epochs {
        let mut case_acc = CaseErrors::default();
        let mut loss_sum = 0.0;
        for b in 0..tc.batches_per_epoch {
            let index = (epoch * tc.batches_per_epoch + b) as u64;
            let batch = sample_batch(config, index, tc.batch_size)?;
            let loss = forward_backward(
                &params,
                &batch,
                &weights,
                &mut grads,
                &mut ws,
                PassOptions {
                    compute_grads: true,
                    compute_layer: !tc.freeze_compute,
                    case_errors: Some(&mut case_acc),
                },
            )
            .f64();
            if !loss.is_finite() {
                params.write_into(&mut model);
                return Err(Error::Diverged(Box::new(DivergedRun {
                    epoch,
                    batch: b,
                    history,
                    model,
                })));
            }
            loss_sum += loss;
            opt.step(&mut params, &grads, mask);
        }
        let compute = params.compute_layer();
        history.push(EpochRecord {
            epoch,
            loss: (loss_sum / tc.batches_per_epoch as f64).sqrt(),
            binarity: binarity_score(&compute.weights).score,
            case_loss: case_acc.rms(),
        });
    }
    params.write_into(&mut model);
    if tc.freeze_compute {
        // keep the frozen layer bit-identical regardless of the working precision
        model.compute = initial_compute.clone();
    }
    Ok(TrainOutcome {
        model,
        history,
        initial_compute,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_run(freeze: bool) -> (ProblemConfig, TrainConfig) {
        let config = ProblemConfig::new(6, 8, 2, 5).unwrap();
        let tc = TrainConfig {
            epochs: 3,
            batches_per_epoch: 10,
            batch_size: 16,
            freeze_compute: freeze,
            ..TrainConfig::default()
        };
        (config, tc)
    }

    #[test]
    fn frozen_training_keeps_compute_layer() {
        let (config, tc) = small_run(true);
        let out = train(&config, &tc).unwrap();
        assert_eq!(out.model.compute, out.initial_compute);
        let init = init_model(&config, &tc.init).unwrap();
        assert_eq!(out.model.compute, init.compute);
        assert_ne!(out.model.readout, init.readout);
    }

    #[test]
    fn training_is_deterministic() {
        let (config, tc) = small_run(false);
        let a = train(&config, &tc).unwrap();
        let b = train(&config, &tc).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.history, b.history);
        assert_ne!(a.model.compute, a.initial_compute);
    }

    #[test]
    fn single_pair_problem_is_learned() {
        // m = 2, s = 2: every sample has both inputs on, only the 11 case exists
        let config = ProblemConfig::new(2, 4, 2, 1).unwrap();
        let tc = TrainConfig {
            epochs: 20,
            batches_per_epoch: 50,
            batch_size: 8,
            learning_rate: 1e-2,
            loss_weights: WeightOverrides {
                w00: Some(0.0),
                w01: Some(0.0),
                w11: None,
            },
            ..TrainConfig::default()
        };
        let out = train(&config, &tc).unwrap();
        let last = out.history.last().unwrap();
        assert!(last.loss < 1e-3, "loss {}", last.loss);
    }

    #[test]
    fn divergence_is_reported_with_partial_history() {
        let config = ProblemConfig::new(4, 4, 2, 0).unwrap();
        let tc = TrainConfig {
            epochs: 50,
            batches_per_epoch: 5,
            batch_size: 4,
            learning_rate: 1e6,
            optimizer: OptimizerKind::Sgd,
            init: InitSpec {
                w_scale: Some(1.0),
                r_scale: Some(1.0),
                ..InitSpec::default()
            },
            ..TrainConfig::default()
        };
        match train(&config, &tc) {
            Err(Error::Diverged(run)) => assert!(run.history.len() <= 50),
            other => panic!("expected divergence, got {:?}", other.map(|o| o.history.len())),
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        let config = ProblemConfig::new(4, 4, 2, 0).unwrap();
        for tc in [
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
        ] {
            assert!(matches!(train(&config, &tc), Err(Error::Config(_))));
        }
    }

    #[test]
    fn f32_and_f64_agree_closely() {
        let (config, mut tc) = small_run(false);
        let a = train(&config, &tc).unwrap();
        tc.precision = Precision::F32;
        let b = train(&config, &tc).unwrap();
        let la = a.history.last().unwrap().loss;
        let lb = b.history.last().unwrap().loss;
        assert!((la - lb).abs() < 1e-3 * la.max(1.0), "{la} vs {lb}");
    }
}
