// SPDX-License-Identifier: MIT OR Apache-2.0

//! Neuron classes recovered from weights, and class-mean truth tables
//! measured on a model.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::for_each_combination;
use crate::config::ProblemConfig;
use crate::constructions::{ClassTruthTable, NeuronClass, CASES};
use crate::datagen::{pool_without, sample_conditioned};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::{self, Domain};

/// Fraction of a row's range beyond which an entry is not near either centre.
pub const NON_BINARY_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassInference {
    /// Class of each neuron for the pair; `None` where the row is flagged.
    pub classes: Vec<Option<NeuronClass>>,
    /// Rows with an entry farther than a quarter of the range from both centres,
    /// or with no spread at all.
    pub non_binary_rows: Vec<usize>,
}

impl ClassInference {
    pub fn counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for c in self.classes.iter().flatten() {
            counts[c.index()] += 1;
        }
        counts
    }
}

/// Per-row two-means split; returns (lower centre, upper centre, is-upper flags).
fn two_means(row: &[f64]) -> (f64, f64, Vec<bool>) {
    let mut lo = row.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut upper: Vec<bool> = row.iter().map(|&w| (w - hi).abs() <= (w - lo).abs()).collect();
    for _ in 0..100 {
        let (mut su, mut nu, mut sl, mut nl) = (0.0, 0usize, 0.0, 0usize);
        for (&w, &up) in row.iter().zip(&upper) {
            if up {
                su += w;
                nu += 1;
            } else {
                sl += w;
                nl += 1;
            }
        }
        if nu > 0 {
            hi = su / nu as f64;
        }
        if nl > 0 {
            lo = sl / nl as f64;
        }
        let next: Vec<bool> = row.iter().map(|&w| (w - hi).abs() <= (w - lo).abs()).collect();
        if next == upper {
            break;
        }
        upper = next;
    }
    (lo, hi, upper)
}

pub fn infer_classes(weights: &Array2<f64>, pair: (usize, usize)) -> Result<ClassInference> {
    let m = weights.ncols();
    let (i, j) = pair;
    if i >= m || j >= m || i == j {
        return Err(Error::config(format!("invalid pair ({i}, {j}) for m={m}")));
    }
    let mut classes = Vec::with_capacity(weights.nrows());
    let mut non_binary_rows = Vec::new();
    for (k, row) in weights.rows().into_iter().enumerate() {
        let row = row.to_vec();
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let range = max - min;
        let (lo, hi, upper) = two_means(&row);
        let flagged = range <= 0.0
            || row
                .iter()
                .any(|&w| (w - lo).abs().min((w - hi).abs()) > NON_BINARY_TOLERANCE * range);
        if flagged {
            non_binary_rows.push(k);
            classes.push(None);
        } else {
            classes.push(Some(NeuronClass::from_upper(upper[i], upper[j])));
        }
    }
    Ok(ClassInference {
        classes,
        non_binary_rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalClassTable {
    pub table: ClassTruthTable,
    /// Standard error of each mean over samples, `[case][class]`.
    pub std_errors: [[f64; 4]; 4],
    pub counts: [usize; 4],
    pub samples_per_case: usize,
    pub interference: bool,
}

fn class_means(y: &Array1<f64>, classes: &[Option<NeuronClass>], counts: &[usize; 4]) -> [f64; 4] {
    let mut sums = [0.0; 4];
    for (v, class) in y.iter().zip(classes) {
        if let Some(c) = class {
            sums[c.index()] += v;
        }
    }
    let mut means = [f64::NAN; 4];
    for c in 0..4 {
        if counts[c] > 0 {
            means[c] = sums[c] / counts[c] as f64;
        }
    }
    means
}

fn validate(model: &Model, classes: &[Option<NeuronClass>], pair: (usize, usize)) -> Result<()> {
    if classes.len() != model.neurons() {
        return Err(Error::shape("class list length differs from neuron count"));
    }
    let m = model.inputs();
    if pair.0 >= m || pair.1 >= m || pair.0 == pair.1 {
        return Err(Error::config(format!("invalid pair {pair:?} for m={m}")));
    }
    Ok(())
}

/// Mean activation of each class for each `(v_i, v_j)` case.
///
/// With `interference` the other `s - v_i - v_j` features are drawn at
/// random for each sample; otherwise only the pair is active. Classes with
/// no members report NaN.
pub fn empirical_class_table(
    model: &Model,
    config: &ProblemConfig,
    pair: (usize, usize),
    classes: &[Option<NeuronClass>],
    samples_per_case: usize,
    interference: bool,
) -> Result<EmpiricalClassTable> {
    model.check_config(config)?;
    validate(model, classes, pair)?;
    let counts = {
        let mut c = [0; 4];
        for class in classes.iter().flatten() {
            c[class.index()] += 1;
        }
        c
    };
    let samples = samples_per_case.max(1);
    let mut pool = pool_without(config.m, pair);
    let mut values = [[0.0; 4]; 4];
    let mut std_errors = [[0.0; 4]; 4];
    for (case, &(vi, vj)) in CASES.iter().enumerate() {
        let pop = usize::from(vi) + usize::from(vj);
        let others = if interference { config.s.saturating_sub(pop) } else { 0 };
        let mut rng = rng::stream(config.seed, Domain::Analysis, (config.pair_index(pair.0, pair.1) * 4 + case) as u64);
        let mut sum = [0.0; 4];
        let mut sum_sq = [0.0; 4];
        for _ in 0..samples {
            let active = sample_conditioned(&mut pool, pair, (vi, vj), others, &mut rng);
            let y = model.hidden_sparse(&active);
            let means = class_means(&y, classes, &counts);
            for c in 0..4 {
                sum[c] += means[c];
                sum_sq[c] += means[c] * means[c];
            }
        }
        let n = samples as f64;
        for c in 0..4 {
            let mean = sum[c] / n;
            values[case][c] = mean;
            std_errors[case][c] = if samples > 1 {
                ((sum_sq[c] / n - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
        }
    }
    Ok(EmpiricalClassTable {
        table: ClassTruthTable { values },
        std_errors,
        counts,
        samples_per_case: samples,
        interference,
    })
}

/// Exact interference-averaged class table, enumerating every choice of the
/// other active features. Cost grows as `C(m - 2, s)`.
pub fn exhaustive_class_table(
    model: &Model,
    config: &ProblemConfig,
    pair: (usize, usize),
    classes: &[Option<NeuronClass>],
) -> Result<ClassTruthTable> {
    model.check_config(config)?;
    validate(model, classes, pair)?;
    let mut counts = [0; 4];
    for class in classes.iter().flatten() {
        counts[class.index()] += 1;
    }
    let pool = pool_without(config.m, pair);
    let mut values = [[0.0; 4]; 4];
    for (case, &(vi, vj)) in CASES.iter().enumerate() {
        let pop = usize::from(vi) + usize::from(vj);
        let others = config.s.saturating_sub(pop);
        let mut sum = [0.0; 4];
        let mut n = 0usize;
        let mut active = Vec::with_capacity(others + 2);
        for_each_combination(pool.len(), others, |idx| {
            active.clear();
            active.extend(idx.iter().map(|&t| pool[t]));
            if vi {
                active.push(pair.0);
            }
            if vj {
                active.push(pair.1);
            }
            let y = model.hidden_sparse(&active);
            let means = class_means(&y, classes, &counts);
            for c in 0..4 {
                sum[c] += means[c];
            }
            n += 1;
        });
        for c in 0..4 {
            values[case][c] = sum[c] / n.max(1) as f64;
        }
    }
    Ok(ClassTruthTable { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_binary_circuit, class_truth_table, BinaryWeightSpec};

    #[test]
    fn recovers_assignment_of_binary_circuit() {
        let config = ProblemConfig::new(12, 64, 3, 2).unwrap();
        let circuit = build_binary_circuit(&config, &BinaryWeightSpec::REPRESENTATIVE).unwrap();
        let inferred = infer_classes(&circuit.model.compute.weights, (3, 8)).unwrap();
        let truth = circuit.assignment.classes(3, 8);
        for (k, c) in inferred.classes.iter().enumerate() {
            // rows where every entry took one value carry no class information
            let row = circuit.assignment.upper.row(k);
            let constant = row.iter().all(|&u| u) || row.iter().all(|&u| !u);
            assert_eq!(inferred.non_binary_rows.contains(&k), constant);
            if !constant {
                assert_eq!(*c, Some(truth[k]));
            }
        }
    }

    #[test]
    fn flags_non_binary_rows() {
        let w = Array2::from_shape_vec((3, 6), vec![
            0.0, 1.0, 0.0, 1.0, 1.0, 0.0, //
            0.0, 0.5, 1.0, 1.0, 0.0, 0.0, //
            0.3, 0.3, 0.3, 0.3, 0.3, 0.3,
        ])
        .unwrap();
        let inferred = infer_classes(&w, (0, 1)).unwrap();
        assert_eq!(inferred.non_binary_rows, vec![1, 2]);
        assert_eq!(inferred.classes[0], Some(NeuronClass::B2));
    }

    #[test]
    fn noiseless_table_matches_construction() {
        let config = ProblemConfig::new(10, 200, 2, 4).unwrap();
        let spec = BinaryWeightSpec::REPRESENTATIVE;
        let circuit = build_binary_circuit(&config, &spec).unwrap();
        let classes: Vec<_> = circuit.assignment.classes(1, 4).into_iter().map(Some).collect();
        let measured = empirical_class_table(&circuit.model, &config, (1, 4), &classes, 3, false).unwrap();
        let expected = class_truth_table(&spec);
        for case in 0..4 {
            for c in 0..4 {
                if measured.counts[c] > 0 {
                    assert!((measured.table.values[case][c] - expected.values[case][c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let config = ProblemConfig::new(9, 300, 3, 8).unwrap();
        let circuit = build_binary_circuit(&config, &BinaryWeightSpec::REPRESENTATIVE).unwrap();
        let classes: Vec<_> = circuit.assignment.classes(0, 5).into_iter().map(Some).collect();
        let exact = exhaustive_class_table(&circuit.model, &config, (0, 5), &classes).unwrap();
        let mc = empirical_class_table(&circuit.model, &config, (0, 5), &classes, 4000, true).unwrap();
        for case in 0..4 {
            for c in 0..4 {
                let diff = (exact.values[case][c] - mc.table.values[case][c]).abs();
                assert!(diff <= 4.0 * mc.std_errors[case][c] + 1e-12, "case {case} class {c}: {diff}");
            }
        }
    }
}
