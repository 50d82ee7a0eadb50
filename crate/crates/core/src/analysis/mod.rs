// SPDX-License-Identifier: MIT OR Apache-2.0

//! Measurements on trained or constructed models.

pub mod binarity;
pub mod classes;
pub mod detect;
pub mod evaluate;
pub mod interference;
pub mod scatter;
pub mod theory;

pub use binarity::{binarity_score, BinarityReport, NeuronBinarity};
pub use classes::{empirical_class_table, exhaustive_class_table, infer_classes, ClassInference, EmpiricalClassTable};
pub use detect::{detect_solution_type, DetectOptions, Detection, SolutionType};
pub use evaluate::{exhaustive_loss, monte_carlo_loss, pair_error_exhaustive, pair_output_variance, LossEstimate, PairErrorStats};
pub use interference::{binomial_interference, interference_stats, InterferenceStats};
pub use scatter::{readout_scatter, ReadoutScatter, ScatterPoint};
pub use theory::{
    calibrate_beta, crossover_predicate, expected_class_table, theory_var_binary, theory_var_cis, VarianceModel,
};

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance the rightmost index that can still move
        let mut t = k;
        while t > 0 && idx[t - 1] == n - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            return;
        }
        idx[t - 1] += 1;
        for u in t..k {
            idx[u] = idx[u - 1] + 1;
        }
    }
}

/// Linear-interpolated quantile of unsorted data.
pub(crate) fn quantile(values: &mut [f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_unstable_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    values[lo] * (1.0 - frac) + values[hi] * frac
}
