// SPDX-License-Identifier: MIT OR Apache-2.0

//! Similarity of a weight matrix to a per-row two-valued distribution.
//!
//! `score = 1 - mean_{i,j} min(|W_ij - u_i|, |W_ij - l_i|) / (2 (u_i - l_i))`
//! with `u_i`, `l_i` the row max and min. A constant row counts as
//! perfectly binary. An i.i.d. uniform matrix scores about 0.875.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronBinarity {
    pub upper: f64,
    pub lower: f64,
    /// Fraction of entries nearer the upper value.
    pub upper_fraction: f64,
    /// 90th percentile of the normalised per-entry deviation.
    pub deviation_q90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarityReport {
    pub score: f64,
    pub neurons: Vec<NeuronBinarity>,
}

pub fn binarity_score(weights: &Array2<f64>) -> BinarityReport {
    let (d, m) = weights.dim();
    let mut total = 0.0;
    let mut neurons = Vec::with_capacity(d);
    let mut devs = Vec::with_capacity(m);
    for row in weights.rows() {
        let upper = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lower = row.iter().copied().fold(f64::INFINITY, f64::min);
        let range = upper - lower;
        devs.clear();
        let mut near_upper = 0usize;
        for &w in row {
            let du = (w - upper).abs();
            let dl = (w - lower).abs();
            if du <= dl {
                near_upper += 1;
            }
            let dev = if range > 0.0 { du.min(dl) / (2.0 * range) } else { 0.0 };
            devs.push(dev);
        }
        total += devs.iter().sum::<f64>();
        neurons.push(NeuronBinarity {
            upper,
            lower,
            upper_fraction: near_upper as f64 / m as f64,
            deviation_q90: quantile(&mut devs, 0.9),
        });
    }
    let score = if d * m == 0 { 1.0 } else { 1.0 - total / (d * m) as f64 };
    BinarityReport { score, neurons }
}
