// SPDX-License-Identifier: MIT OR Apache-2.0

//! Case-balanced loss.
//!
//! Every off-diagonal output falls into one of three cases by the state of
//! its two inputs. Under exactly-`s` sampling the `(0,0)` case dominates, so
//! each case gets a weight inversely proportional to its expected pair count
//! and all three contribute the same expected mass.

use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::model::target;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Both inputs inactive.
    Neither,
    /// Exactly one input active.
    One,
    /// Both inputs active.
    Both,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::Neither, Case::One, Case::Both];

    #[inline]
    pub fn of(vi: bool, vj: bool) -> Self {
        match (vi, vj) {
            (false, false) => Case::Neither,
            (true, true) => Case::Both,
            _ => Case::One,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Expected number of off-diagonal ordered pairs in this case per sample.
    pub fn pair_count(self, m: usize, s: usize) -> usize {
        match self {
            Case::Both => s * s.saturating_sub(1),
            Case::One => 2 * s * (m - s),
            Case::Neither => (m - s) * (m - s).saturating_sub(1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::Neither => "00",
            Case::One => "01",
            Case::Both => "11",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w00: f64,
    pub w01: f64,
    pub w11: f64,
}

impl LossWeights {
    pub fn uniform() -> Self {
        Self { w00: 1.0, w01: 1.0, w11: 1.0 }
    }

    #[inline]
    pub fn get(&self, case: Case) -> f64 {
        match case {
            Case::Neither => self.w00,
            Case::One => self.w01,
            Case::Both => self.w11,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w00, self.w01, self.w11]
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.as_array() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::config(format!("loss weight {w} must be finite and nonnegative")));
            }
        }
        if self.as_array().iter().all(|&w| w == 0.0) {
            return Err(Error::config("all loss weights are zero"));
        }
        Ok(())
    }
}

/// Explicit per-case weights that replace the balanced value.
///
/// A case with zero expected count must be overridden (normally with 0).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightOverrides {
    #[serde(default)]
    pub w00: Option<f64>,
    #[serde(default)]
    pub w01: Option<f64>,
    #[serde(default)]
    pub w11: Option<f64>,
}

impl WeightOverrides {
    fn get(&self, case: Case) -> Option<f64> {
        match case {
            Case::Neither => self.w00,
            Case::One => self.w01,
            Case::Both => self.w11,
        }
    }
}

/// Balanced weights normalised so `w_c * count_c = m(m-1)/3` for every case,
/// i.e. the expected weight per off-diagonal pair is 1.
pub fn compute_loss_weights(config: &ProblemConfig) -> Result<LossWeights> {
    compute_loss_weights_with(config, &WeightOverrides::default())
}

pub fn compute_loss_weights_with(config: &ProblemConfig, overrides: &WeightOverrides) -> Result<LossWeights> {
    config.validate()?;
    let (m, s) = (config.m, config.s);
    let share = (m * (m - 1)) as f64 / 3.0;
    let mut w = [0.0; 3];
    for case in Case::ALL {
        w[case.index()] = match overrides.get(case) {
            Some(value) => value,
            None => {
                let count = case.pair_count(m, s);
                if count == 0 {
                    return Err(Error::config(format!(
                        "case {} has no pairs at m={m}, s={s}; override its weight",
                        case.label()
                    )));
                }
                share / count as f64
            }
        };
    }
    let weights = LossWeights {
        w00: w[0],
        w01: w[1],
        w11: w[2],
    };
    weights.validate()?;
    Ok(weights)
}

/// Squared error summed per case with pair counts, over off-diagonal pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaseErrors {
    pub sum_sq: [f64; 3],
    pub count: [u64; 3],
}

impl CaseErrors {
    pub fn merge(&mut self, other: &CaseErrors) {
        for k in 0..3 {
            self.sum_sq[k] += other.sum_sq[k];
            self.count[k] += other.count[k];
        }
    }

    /// Unweighted RMS error per case; NaN for cases never seen.
    pub fn rms(&self) -> [f64; 3] {
        let mut out = [f64::NAN; 3];
        for k in 0..3 {
            if self.count[k] > 0 {
                out[k] = (self.sum_sq[k] / self.count[k] as f64).sqrt();
            }
        }
        out
    }

    pub fn weighted_mean_sq(&self, weights: &LossWeights, pairs: u64) -> f64 {
        let w = weights.as_array();
        (0..3).map(|k| w[k] * self.sum_sq[k]).sum::<f64>() / pairs as f64
    }
}

/// Accumulates per-case squared errors for one sample.
pub fn case_errors(z: &[f64], v: &[f64]) -> CaseErrors {
    let m = v.len();
    let mut acc = CaseErrors::default();
    for i in 0..m {
        let vi = v[i] != 0.0;
        for j in 0..m {
            if i == j {
                continue;
            }
            let vj = v[j] != 0.0;
            let t = if vi && vj { 1.0 } else { 0.0 };
            let e = z[i * m + j] - t;
            let k = Case::of(vi, vj).index();
            acc.sum_sq[k] += e * e;
            acc.count[k] += 1;
        }
    }
    acc
}

/// Weighted RMS over off-diagonal ordered pairs:
/// `sqrt( sum_{i != j} w_case(i,j) (z_ij - target_ij)^2 / (m (m - 1)) )`.
pub fn weighted_loss(z: &[f64], v: &[f64], weights: &LossWeights) -> Result<f64> {
    let m = v.len();
    if z.len() != m * m {
        return Err(Error::shape(format!("z has length {}, expected {}", z.len(), m * m)));
    }
    if m < 2 {
        return Err(Error::shape("need at least two inputs"));
    }
    let acc = case_errors(z, v);
    Ok(acc.weighted_mean_sq(weights, (m * (m - 1)) as u64).sqrt())
}

/// Weighted RMS of the degenerate additive predictor `z = 0.4 (v_i + v_j)`.
pub fn baseline_additive_loss(config: &ProblemConfig, weights: &LossWeights) -> f64 {
    additive_loss(config, weights, 0.4)
}

/// Expected weighted RMS of `z = alpha (v_i + v_j)` in closed form.
///
/// Per-case squared errors are `0`, `alpha^2`, `(1 - 2 alpha)^2`; each case is
/// weighted by `w_c * count_c`.
pub fn additive_loss(config: &ProblemConfig, weights: &LossWeights, alpha: f64) -> f64 {
    let (m, s) = (config.m, config.s);
    let sq = [0.0, alpha * alpha, (1.0 - 2.0 * alpha).powi(2)];
    let mut num = 0.0;
    let mut den = 0.0;
    for case in Case::ALL {
        let mass = weights.get(case) * case.pair_count(m, s) as f64;
        num += mass * sq[case.index()];
        den += mass;
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// Dense target for the sample, convenient for tests.
pub fn target_for(v: &[f64]) -> Vec<f64> {
    target(v).to_vec()
}
