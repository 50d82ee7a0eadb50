// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form least-squares readout for one output pair.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::TruthTable2;
use crate::config::ProblemConfig;
use crate::datagen::{pool_without, sample_conditioned};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Model;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    /// Samples in each of the `00`, mixed and `11` strata.
    pub n_per_case: usize,
    /// Ridge penalty per sample on the weights (not the bias).
    pub ridge: f64,
    pub target: TruthTable2,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_per_case: 4096,
            ridge: 1e-6,
            target: TruthTable2::AND,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReadout {
    pub weights: Array1<f64>,
    pub bias: f64,
}

impl PairReadout {
    pub fn install(&self, model: &mut Model, pair: (usize, usize)) {
        let row = pair.0 * model.inputs() + pair.1;
        model.readout.weights.row_mut(row).assign(&self.weights);
        model.readout.bias[row] = self.bias;
    }
}

const CHUNK: usize = 1024;

/// Fits `z_ij = r . y + c` to `probe.target` by ridge least squares on
/// freshly sampled activations, with the three input cases equally
/// represented (the balanced loss optimum).
pub fn fit_pair_readout(
    model: &Model,
    config: &ProblemConfig,
    pair: (usize, usize),
    probe: &ProbeConfig,
) -> Result<PairReadout> {
    model.check_config(config)?;
    let (m, d, s) = (config.m, config.d, config.s);
    let (i, j) = pair;
    if i == j || i >= m || j >= m {
        return Err(Error::config(format!("invalid pair ({i}, {j})")));
    }
    if s < 2 {
        return Err(Error::config("least-squares readout needs s >= 2 for the 11 case"));
    }
    if probe.n_per_case == 0 {
        return Err(Error::config("n_per_case must be at least 1"));
    }
    let dim = d + 1;
    let mut gram = Array2::<f64>::zeros((dim, dim));
    let mut rhs = Array1::<f64>::zeros(dim);
    let mut rng = rng::stream(config.seed, Domain::Probe, (i * m + j) as u64);
    let mut pool = pool_without(m, pair);

    let total = 3 * probe.n_per_case;
    let mut features = Array2::<f64>::zeros((CHUNK, dim));
    let mut filled = 0;
    let flush = |features: &Array2<f64>, rows: usize, gram: &mut Array2<f64>| {
        let view = features.slice(ndarray::s![..rows, ..]);
        general_mat_mul(1.0, &view.t(), &view, 1.0, gram);
    };
    for n in 0..total {
        let stratum = n % 3;
        let case = match stratum {
            0 => (false, false),
            1 if (n / 3) % 2 == 0 => (true, false),
            1 => (false, true),
            _ => (true, true),
        };
        let pop = usize::from(case.0) + usize::from(case.1);
        let active = sample_conditioned(&mut pool, pair, case, s - pop, &mut rng);
        let y = model.hidden_sparse(&active);
        let t = probe.target.value(case.0, case.1);
        let mut row = features.row_mut(filled);
        row.slice_mut(ndarray::s![..d]).assign(&y);
        row[d] = 1.0;
        if t != 0.0 {
            rhs.scaled_add(t, &row);
        }
        filled += 1;
        if filled == CHUNK {
            flush(&features, filled, &mut gram);
            filled = 0;
        }
    }
    if filled > 0 {
        flush(&features, filled, &mut gram);
    }
    let penalty = probe.ridge * total as f64;
    for k in 0..d {
        gram[[k, k]] += penalty;
    }
    // a tiny floor keeps dead neurons (all-zero columns) from breaking the factorisation
    let floor = 1e-12 * total as f64;
    for k in 0..dim {
        gram[[k, k]] += floor;
    }
    let mut factor = gram.into_raw_vec_and_offset().0;
    linalg::cholesky(&mut factor, dim)?;
    let mut solution = rhs.to_vec();
    linalg::cholesky_solve(&factor, dim, &mut solution);
    let bias = solution[d];
    solution.truncate(d);
    Ok(PairReadout {
        weights: Array1::from(solution),
        bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ComputeLayer;

    #[test]
    fn recovers_exact_and_neuron() {
        // neuron 0 computes the AND of inputs 0 and 1 exactly
        let m = 5;
        let mut w = Array2::zeros((3, m));
        w[[0, 0]] = 1.0;
        w[[0, 1]] = 1.0;
        w[[1, 2]] = 1.0;
        w[[2, 3]] = 0.5;
        let mut b = Array1::zeros(3);
        b[0] = -1.0;
        let model = Model::from_compute(ComputeLayer { weights: w, bias: b });
        let config = ProblemConfig::new(m, 3, 2, 0).unwrap();
        let fit = fit_pair_readout(
            &model,
            &config,
            (0, 1),
            &ProbeConfig {
                n_per_case: 200,
                ridge: 0.0,
                target: TruthTable2::AND,
            },
        )
        .unwrap();
        assert!((fit.weights[0] - 1.0).abs() < 1e-6, "{fit:?}");
        assert!(fit.bias.abs() < 1e-6);
    }

    #[test]
    fn requires_two_active_inputs() {
        let model = Model::zeros(4, 2);
        let config = ProblemConfig::new(4, 2, 1, 0).unwrap();
        assert!(fit_pair_readout(&model, &config, (0, 1), &ProbeConfig::default()).is_err());
    }
}
