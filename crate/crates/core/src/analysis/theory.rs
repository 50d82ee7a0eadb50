// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form variance models for the two constructions.

use serde::{Deserialize, Serialize};

use crate::constructions::{BinaryWeightSpec, ClassTruthTable, NeuronClass, CASES};
use crate::model::relu;

/// `beta * s * p (1 - p) / (d p^2)`.
pub fn theory_var_cis(s: f64, d: f64, p: f64, beta: f64) -> f64 {
    beta * s * p * (1.0 - p) / (d * p * p)
}

/// `beta (u - l)^2 16 s^2 p (1 - p) (1/p^2 + 2/(p (1 - p)) + 1/(1 - p)^2) / d`.
pub fn theory_var_binary(s: f64, d: f64, p: f64, u: f64, l: f64, beta: f64) -> f64 {
    let q = 1.0 - p;
    let bracket = 1.0 / (p * p) + 2.0 / (p * q) + 1.0 / (q * q);
    beta * (u - l).powi(2) * 16.0 * s * s * p * q * bracket / d
}

/// True when `s < sqrt(d) / ln^2 m`, the regime where the binary circuit's
/// predicted variance is the lower of the two.
pub fn crossover_predicate(s: f64, d: f64, m: f64) -> bool {
    let ln = m.ln();
    s < d.sqrt() / (ln * ln)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceModel {
    /// ReLU variance attenuation.
    pub beta: f64,
    pub s: f64,
    pub d: f64,
    pub p: f64,
    pub u: f64,
    pub l: f64,
}

impl VarianceModel {
    pub fn binary(&self) -> f64 {
        theory_var_binary(self.s, self.d, self.p, self.u, self.l, self.beta)
    }

    pub fn cis(&self) -> f64 {
        theory_var_cis(self.s, self.d, self.p, self.beta)
    }
}

pub(crate) fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    let mut coef = 1.0;
    for k in 0..=n {
        pmf[k] = coef * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        coef = coef * (n - k) as f64 / (k + 1) as f64;
    }
    pmf
}

/// `Var(ReLU(X + shift)) / Var(X)` for `X ~ (u - l) Binom(s, p) + s l`,
/// computed exactly. `None` when `Var(X) = 0`.
pub fn calibrate_beta(u: f64, l: f64, p: f64, s: usize, shift: f64) -> Option<f64> {
    let pmf = binomial_pmf(s, p);
    let mut moments = [0.0; 4];
    for (k, prob) in pmf.iter().enumerate() {
        let x = (u - l) * k as f64 + s as f64 * l;
        let y = relu(x + shift);
        moments[0] += prob * x;
        moments[1] += prob * x * x;
        moments[2] += prob * y;
        moments[3] += prob * y * y;
    }
    let var_x = moments[1] - moments[0] * moments[0];
    let var_y = (moments[3] - moments[2] * moments[2]).max(0.0);
    (var_x > 1e-300).then(|| var_y / var_x)
}

/// Class truth table averaged over binomial interference: in each input case
/// the other `s - v_i - v_j` active features contribute
/// `(u - l) Binom(., p) + (.) l` to the pre-activation.
pub fn expected_class_table(spec: &BinaryWeightSpec, s: usize) -> ClassTruthTable {
    let mut values = [[0.0; 4]; 4];
    for (case, &(vi, vj)) in CASES.iter().enumerate() {
        let others = s.saturating_sub(usize::from(vi) + usize::from(vj));
        let pmf = binomial_pmf(others, spec.p);
        for class in NeuronClass::ALL {
            let (wi, wj) = spec.class_weights(class);
            let base = spec.bias + if vi { wi } else { 0.0 } + if vj { wj } else { 0.0 };
            values[case][class.index()] = pmf
                .iter()
                .enumerate()
                .map(|(k, prob)| {
                    let x = (spec.upper - spec.lower) * k as f64 + others as f64 * spec.lower;
                    prob * relu(base + x)
                })
                .sum();
        }
    }
    ClassTruthTable { values }
}
