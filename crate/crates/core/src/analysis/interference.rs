// SPDX-License-Identifier: MIT OR Apache-2.0

//! Statistics of the interference term `X_k = sum_{j not in pair} W_kj v_j`.

use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::constructions::BinaryWeightSpec;
use crate::datagen::{partial_shuffle, pool_without};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceStats {
    pub pair: (usize, usize),
    /// Active features outside the pair in every sample.
    pub others: usize,
    pub samples: usize,
    pub neuron_mean: Vec<f64>,
    pub neuron_var: Vec<f64>,
    /// Mean over all (neuron, sample) values.
    pub pooled_mean: f64,
    /// Variance over all (neuron, sample) values.
    pub pooled_var: f64,
}

/// Samples `n_samples` sets of `others` active features outside `pair` and
/// accumulates `X_k` for every neuron.
pub fn interference_stats(
    model: &Model,
    config: &ProblemConfig,
    pair: (usize, usize),
    others: usize,
    n_samples: usize,
) -> Result<InterferenceStats> {
    model.check_config(config)?;
    let (m, d) = (config.m, config.d);
    if pair.0 >= m || pair.1 >= m || pair.0 == pair.1 {
        return Err(Error::config(format!("invalid pair {pair:?} for m={m}")));
    }
    if others > m - 2 {
        return Err(Error::config(format!("{others} other active features exceed the {} available", m - 2)));
    }
    if n_samples == 0 {
        return Err(Error::config("n_samples must be at least 1"));
    }
    // column-major copy so each active feature is a contiguous slice
    let columns: Vec<Vec<f64>> = (0..m).map(|j| model.compute.weights.column(j).to_vec()).collect();
    let mut pool = pool_without(m, pair);
    let mut rng = rng::stream(config.seed, Domain::Analysis, (1 << 32) + config.pair_index(pair.0, pair.1) as u64);
    // sums are taken relative to the first sample to avoid cancellation
    let mut shift: Option<Vec<f64>> = None;
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    let mut x = vec![0.0; d];
    for _ in 0..n_samples {
        partial_shuffle(&mut pool, others, &mut rng);
        x.fill(0.0);
        for &j in &pool[..others] {
            for (acc, w) in x.iter_mut().zip(&columns[j]) {
                *acc += w;
            }
        }
        let k0 = shift.get_or_insert_with(|| x.clone());
        for k in 0..d {
            let dx = x[k] - k0[k];
            sum[k] += dx;
            sum_sq[k] += dx * dx;
        }
    }
    let shift = shift.unwrap_or_else(|| vec![0.0; d]);
    let n = n_samples as f64;
    let mut neuron_mean = Vec::with_capacity(d);
    let mut neuron_var = Vec::with_capacity(d);
    for k in 0..d {
        let mean = sum[k] / n;
        neuron_mean.push(shift[k] + mean);
        neuron_var.push((sum_sq[k] / n - mean * mean).max(0.0));
    }
    // law of total variance over the (neuron, sample) population
    let pooled_mean = neuron_mean.iter().sum::<f64>() / d as f64;
    let between = neuron_mean.iter().map(|mu| (mu - pooled_mean).powi(2)).sum::<f64>() / d as f64;
    let pooled_var = neuron_var.iter().sum::<f64>() / d as f64 + between;
    Ok(InterferenceStats {
        pair,
        others,
        samples: n_samples,
        neuron_mean,
        neuron_var,
        pooled_mean,
        pooled_var,
    })
}

/// Mean and variance of `X ~ (u - l) Binom(others, p) + others l`.
pub fn binomial_interference(spec: &BinaryWeightSpec, others: usize) -> (f64, f64) {
    let s = others as f64;
    let gap = spec.upper - spec.lower;
    (s * spec.lower + gap * s * spec.p, gap * gap * s * spec.p * (1.0 - spec.p))
}
