// SPDX-License-Identifier: MIT OR Apache-2.0

//! Loss and per-pair error estimates, by sampling or full enumeration.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::for_each_combination;
use crate::config::ProblemConfig;
use crate::constructions::{TruthTable2, CASES};
use crate::datagen::{pool_without, sample_batch_in, sample_conditioned};
use crate::error::{Error, Result};
use crate::loss::{Case, LossWeights};
use crate::model::Model;
use crate::rng::{self, Domain};

/// Largest input-pattern count `exhaustive_loss` will enumerate.
pub const MAX_PATTERNS: u64 = 4_000_000;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    /// Square root of the weighted mean squared error.
    pub loss: f64,
    pub mean_sq: f64,
    /// Standard error of `mean_sq`; 0 for exact enumeration.
    pub mean_sq_std_error: f64,
    /// RMS error per case, in `00, 01, 11` order.
    pub case_rms: [f64; 3],
    pub samples: u64,
}

struct Accumulator {
    weights: [f64; 3],
    sum: f64,
    sum_sq: f64,
    n: u64,
    case_sq: [f64; 3],
    case_n: [u64; 3],
}

impl Accumulator {
    fn new(weights: &LossWeights) -> Self {
        Self {
            weights: weights.as_array(),
            sum: 0.0,
            sum_sq: 0.0,
            n: 0,
            case_sq: [0.0; 3],
            case_n: [0; 3],
        }
    }

    /// Scores a chunk: `z` holds one output row per active set.
    fn add(&mut self, z: ArrayView2<f64>, rows: &[Vec<usize>], m: usize) {
        let mut on = vec![false; m];
        for (n, active) in rows.iter().enumerate() {
            on.fill(false);
            for &k in active {
                on[k] = true;
            }
            let zr = z.row(n);
            let mut total = 0.0;
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let case = Case::of(on[i], on[j]).index();
                    let t = if on[i] && on[j] { 1.0 } else { 0.0 };
                    let e = zr[i * m + j] - t;
                    total += self.weights[case] * e * e;
                    self.case_sq[case] += e * e;
                    self.case_n[case] += 1;
                }
            }
            let q = total / (m * (m - 1)) as f64;
            self.sum += q;
            self.sum_sq += q * q;
            self.n += 1;
        }
    }

    fn finish(&self, exact: bool) -> LossEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let se = if exact || self.n < 2 {
            0.0
        } else {
            ((self.sum_sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
        };
        let mut case_rms = [f64::NAN; 3];
        for c in 0..3 {
            if self.case_n[c] > 0 {
                case_rms[c] = (self.case_sq[c] / self.case_n[c] as f64).sqrt();
            }
        }
        LossEstimate {
            loss: mean.max(0.0).sqrt(),
            mean_sq: mean,
            mean_sq_std_error: se,
            case_rms,
            samples: self.n,
        }
    }
}

fn outputs(model: &Model, rows: &[Vec<usize>], y: &mut Array2<f64>, z: &mut Array2<f64>) {
    for (n, active) in rows.iter().enumerate() {
        y.row_mut(n).assign(&model.hidden_sparse(active));
    }
    let b = rows.len();
    let yv = y.slice(ndarray::s![..b, ..]);
    let mut zv = z.slice_mut(ndarray::s![..b, ..]);
    for mut row in zv.rows_mut() {
        row.assign(&model.readout.bias);
    }
    general_mat_mul(1.0, &yv, &model.readout.weights.t(), 1.0, &mut zv);
}

fn check(model: &Model, config: &ProblemConfig, weights: &LossWeights) -> Result<()> {
    model.validate()?;
    model.check_config(config)?;
    weights.validate()
}

/// Weighted loss estimated on `n_samples` fresh inputs from evaluation
/// stream `stream`.
pub fn monte_carlo_loss(
    model: &Model,
    config: &ProblemConfig,
    weights: &LossWeights,
    n_samples: usize,
    stream: u64,
) -> Result<LossEstimate> {
    check(model, config, weights)?;
    if n_samples == 0 {
        return Err(Error::config("n_samples must be at least 1"));
    }
    let (m, d) = (config.m, config.d);
    let mut acc = Accumulator::new(weights);
    let mut y = Array2::zeros((CHUNK, d));
    let mut z = Array2::zeros((CHUNK, m * m));
    let mut done = 0;
    let mut chunk_index = 0u64;
    while done < n_samples {
        let b = CHUNK.min(n_samples - done);
        let batch = sample_batch_in(config, Domain::Evaluation, (stream << 24) + chunk_index, b)?;
        let rows: Vec<Vec<usize>> = batch.rows().map(<[usize]>::to_vec).collect();
        outputs(model, &rows, &mut y, &mut z);
        acc.add(z.slice(ndarray::s![..b, ..]), &rows, m);
        done += b;
        chunk_index += 1;
    }
    Ok(acc.finish(false))
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut c: u128 = 1;
    for t in 0..k.min(n - k) {
        c = c * (n - t) as u128 / (t + 1) as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// Exact weighted loss over every input with exactly `s` active features.
pub fn exhaustive_loss(model: &Model, config: &ProblemConfig, weights: &LossWeights) -> Result<LossEstimate> {
    check(model, config, weights)?;
    let (m, d, s) = (config.m, config.d, config.s);
    let patterns = binomial(m, s);
    if patterns > MAX_PATTERNS {
        return Err(Error::config(format!("C({m}, {s}) = {patterns} patterns is too many to enumerate")));
    }
    let mut acc = Accumulator::new(weights);
    let mut y = Array2::zeros((CHUNK, d));
    let mut z = Array2::zeros((CHUNK, m * m));
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
    let mut flush = |rows: &mut Vec<Vec<usize>>, acc: &mut Accumulator| {
        outputs(model, rows, &mut y, &mut z);
        acc.add(z.slice(ndarray::s![..rows.len(), ..]), rows, m);
        rows.clear();
    };
    for_each_combination(m, s, |c| {
        rows.push(c.to_vec());
        if rows.len() == CHUNK {
            flush(&mut rows, &mut acc);
        }
    });
    if !rows.is_empty() {
        flush(&mut rows, &mut acc);
    }
    Ok(acc.finish(true))
}

/// Error of one output `z_ij` against a target table, split by the four
/// `(v_i, v_j)` cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairErrorStats {
    pub pair: (usize, usize),
    /// Mean squared error over all evaluated inputs.
    pub mse: f64,
    pub case_mse: [f64; 4],
    pub case_mean: [f64; 4],
    /// Variance of `z_ij` within each case.
    pub case_var: [f64; 4],
    pub case_samples: [u64; 4],
}

impl PairErrorStats {
    /// Mean of the within-case variances over the cases that were observed.
    pub fn mean_case_var(&self) -> f64 {
        let observed: Vec<f64> = (0..4).filter(|&c| self.case_samples[c] > 0).map(|c| self.case_var[c]).collect();
        observed.iter().sum::<f64>() / observed.len().max(1) as f64
    }
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
    err_sq: f64,
}

fn pair_stats(pair: (usize, usize), moments: &[Moments; 4]) -> PairErrorStats {
    let mut stats = PairErrorStats {
        pair,
        mse: 0.0,
        case_mse: [f64::NAN; 4],
        case_mean: [f64::NAN; 4],
        case_var: [f64::NAN; 4],
        case_samples: [0; 4],
    };
    let (mut total_err, mut total_n) = (0.0, 0u64);
    for (c, mo) in moments.iter().enumerate() {
        stats.case_samples[c] = mo.n;
        if mo.n == 0 {
            continue;
        }
        let n = mo.n as f64;
        let mean = mo.sum / n;
        stats.case_mean[c] = mean;
        stats.case_var[c] = (mo.sum_sq / n - mean * mean).max(0.0);
        stats.case_mse[c] = mo.err_sq / n;
        total_err += mo.err_sq;
        total_n += mo.n;
    }
    stats.mse = total_err / total_n.max(1) as f64;
    stats
}

fn check_pair(model: &Model, config: &ProblemConfig, pair: (usize, usize)) -> Result<()> {
    model.validate()?;
    model.check_config(config)?;
    if pair.0 >= config.m || pair.1 >= config.m || pair.0 == pair.1 {
        return Err(Error::config(format!("invalid pair {pair:?} for m={}", config.m)));
    }
    Ok(())
}

fn case_index(vi: bool, vj: bool) -> usize {
    CASES.iter().position(|&c| c == (vi, vj)).unwrap_or(0)
}

/// Enumerates every input with exactly `s` active features and scores `z_ij`.
pub fn pair_error_exhaustive(
    model: &Model,
    config: &ProblemConfig,
    pair: (usize, usize),
    target: &TruthTable2,
) -> Result<PairErrorStats> {
    check_pair(model, config, pair)?;
    let patterns = binomial(config.m, config.s);
    if patterns > MAX_PATTERNS {
        return Err(Error::config(format!("{patterns} patterns is too many to enumerate")));
    }
    let mut moments = [Moments::default(); 4];
    for_each_combination(config.m, config.s, |active| {
        let vi = active.contains(&pair.0);
        let vj = active.contains(&pair.1);
        let z = model.readout_pair(&model.hidden_sparse(active), pair.0, pair.1);
        let e = z - target.value(vi, vj);
        let mo = &mut moments[case_index(vi, vj)];
        mo.n += 1;
        mo.sum += z;
        mo.sum_sq += z * z;
        mo.err_sq += e * e;
    });
    Ok(pair_stats(pair, &moments))
}

/// Samples `n_per_case` inputs in each `(v_i, v_j)` case, with the other
/// `s - v_i - v_j` features uniform, and scores `z_ij`.
///
/// Cases that need more active features than `s` allows are skipped.
pub fn pair_output_variance(
    model: &Model,
    config: &ProblemConfig,
    pair: (usize, usize),
    target: &TruthTable2,
    n_per_case: usize,
) -> Result<PairErrorStats> {
    check_pair(model, config, pair)?;
    let mut pool = pool_without(config.m, pair);
    let mut moments = [Moments::default(); 4];
    for (c, &(vi, vj)) in CASES.iter().enumerate() {
        let pop = usize::from(vi) + usize::from(vj);
        if pop > config.s || config.s - pop > pool.len() {
            continue;
        }
        let index = (1u64 << 40) + (config.pair_index(pair.0, pair.1) * 4 + c) as u64;
        let mut rng = rng::stream(config.seed, Domain::Evaluation, index);
        let mo = &mut moments[c];
        for _ in 0..n_per_case {
            let active = sample_conditioned(&mut pool, pair, (vi, vj), config.s - pop, &mut rng);
            let z = model.readout_pair(&model.hidden_sparse(&active), pair.0, pair.1);
            let e = z - target.value(vi, vj);
            mo.n += 1;
            mo.sum += z;
            mo.sum_sq += z * z;
            mo.err_sq += e * e;
        }
    }
    Ok(pair_stats(pair, &moments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{baseline_additive_loss, compute_loss_weights, weighted_loss};
    use crate::model::{ComputeLayer, ReadoutLayer};
    use ndarray::Array1;

    fn additive_model(m: usize, alpha: f64) -> Model {
        let mut model = Model::from_compute(ComputeLayer {
            weights: Array2::eye(m),
            bias: Array1::zeros(m),
        });
        let mut r = Array2::zeros((m * m, m));
        for i in 0..m {
            for j in 0..m {
                r[[i * m + j, i]] = alpha;
                r[[i * m + j, j]] += alpha;
            }
        }
        model.readout = ReadoutLayer {
            weights: r,
            bias: Array1::zeros(m * m),
        };
        model
    }

    #[test]
    fn exhaustive_loss_of_additive_model_matches_closed_form() {
        let config = ProblemConfig::new(7, 7, 3, 0).unwrap();
        let weights = compute_loss_weights(&config).unwrap();
        let est = exhaustive_loss(&additive_model(7, 0.4), &config, &weights).unwrap();
        let expected = baseline_additive_loss(&config, &weights);
        assert!((est.loss - expected).abs() < 1e-12, "{} {}", est.loss, expected);
        assert_eq!(est.samples, 35);
    }

    #[test]
    fn exhaustive_matches_direct_weighted_loss() {
        let config = ProblemConfig::new(5, 5, 2, 0).unwrap();
        let weights = compute_loss_weights(&config).unwrap();
        let model = additive_model(5, 0.3);
        let mut direct = 0.0;
        let mut n = 0.0;
        for_each_combination(5, 2, |c| {
            let mut v = vec![0.0; 5];
            for &k in c {
                v[k] = 1.0;
            }
            let (_, z) = model.forward(&v).unwrap();
            direct += weighted_loss(z.as_slice().unwrap(), &v, &weights).unwrap().powi(2);
            n += 1.0;
        });
        let est = exhaustive_loss(&model, &config, &weights).unwrap();
        assert!((est.mean_sq - direct / n).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let config = ProblemConfig::new(8, 8, 3, 1).unwrap();
        let weights = compute_loss_weights(&config).unwrap();
        let mut model = additive_model(8, 0.25);
        for i in 0..8 {
            model.readout.weights[[i * 8 + (i + 3) % 8, (i * 5) % 8]] += 0.1 * i as f64;
        }
        let exact = exhaustive_loss(&model, &config, &weights).unwrap();
        let mc = monte_carlo_loss(&model, &config, &weights, 4000, 0).unwrap();
        assert!((exact.mean_sq - mc.mean_sq).abs() < 4.0 * mc.mean_sq_std_error, "{exact:?} {mc:?}");
        assert!(mc.mean_sq_std_error > 0.0);
    }

    #[test]
    fn pair_error_of_exact_and_neuron_is_zero() {
        let m = 6;
        let mut w = Array2::zeros((1, m));
        w[[0, 1]] = 1.0;
        w[[0, 4]] = 1.0;
        let mut model = Model::from_compute(ComputeLayer {
            weights: w,
            bias: Array1::from_elem(1, -1.0),
        });
        model.readout.weights[[m + 4, 0]] = 1.0;
        let config = ProblemConfig::new(m, 1, 3, 0).unwrap();
        let exact = pair_error_exhaustive(&model, &config, (1, 4), &TruthTable2::AND).unwrap();
        assert_eq!(exact.mse, 0.0);
        assert_eq!(exact.case_samples.iter().sum::<u64>(), 20);
        let mc = pair_output_variance(&model, &config, (1, 4), &TruthTable2::AND, 50).unwrap();
        assert_eq!(mc.mse, 0.0);
        assert_eq!(mc.mean_case_var(), 0.0);
    }
}
