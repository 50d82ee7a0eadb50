// SPDX-License-Identifier: MIT OR Apache-2.0

//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function returns a JSON or SVG string. The `*_json` and
//! `*_svg` functions are the plain Rust versions used by native tests.

use serde_json::json;
use uand::analysis::{calibrate_beta, expected_class_table, readout_scatter, theory_var_binary, theory_var_cis};
use uand::constructions::{
    build_binary_circuit, class_truth_table, solve_readout, BinaryWeightSpec, CisConfig, NeuronClass, TruthTable2, CASES,
};
use uand::svg::LineChart;
use uand::{Error, ProblemConfig, Result};
use wasm_bindgen::prelude::*;

/// Largest `m * d` the scatter plot will build in the browser.
pub const MAX_CELLS: usize = 1 << 20;

fn spec(upper: f64, lower: f64, p: f64, bias: f64) -> Result<BinaryWeightSpec> {
    let spec = BinaryWeightSpec { upper, lower, p, bias };
    spec.validate()?;
    Ok(spec)
}

/// Class truth table and the readout coefficients that combine it into
/// `target`. With `s >= 2` the table averages over binomial interference
/// from the other `s - v_i - v_j` active inputs.
pub fn truth_table_json(upper: f64, lower: f64, p: f64, bias: f64, s: usize, target: &str) -> Result<String> {
    let spec = spec(upper, lower, p, bias)?;
    let wanted = TruthTable2::by_name(target).ok_or_else(|| Error::config(format!("unknown target {target:?}")))?;
    let table = if s >= 2 { expected_class_table(&spec, s) } else { class_truth_table(&spec) };
    let coefficients = solve_readout(&table, &wanted)?;
    let cases: Vec<String> = CASES.iter().map(|&(a, b)| format!("{}{}", u8::from(a), u8::from(b))).collect();
    let classes: Vec<String> = NeuronClass::ALL.iter().map(|c| format!("{c:?}")).collect();
    let value = json!({
        "cases": cases,
        "classes": classes,
        "table": table.values,
        "target": wanted.values(),
        "coefficients": coefficients,
        "reconstruction": table.combine(&coefficients),
    });
    Ok(value.to_string())
}

/// Predicted readout variance of both constructions against `d` on log axes.
pub fn variance_svg(s: usize, m: usize, upper: f64, lower: f64, p: f64, d_min: usize, d_max: usize) -> Result<String> {
    let spec = spec(upper, lower, p, 0.0)?;
    if s == 0 || m < 3 || d_min == 0 || d_max <= d_min {
        return Err(Error::config("need s >= 1, m >= 3 and 0 < d_min < d_max"));
    }
    let beta = calibrate_beta(spec.upper, spec.lower, spec.p, s, 0.0).unwrap_or(1.0);
    let steps = 32;
    let ratio = (d_max as f64 / d_min as f64).powf(1.0 / steps as f64);
    let (mut binary, mut cis) = (Vec::new(), Vec::new());
    for k in 0..=steps {
        let d = d_min as f64 * ratio.powi(k);
        binary.push((d, theory_var_binary(s as f64, d, spec.p, spec.upper, spec.lower, beta)));
        let density = CisConfig::default().density(m, d.round() as usize);
        if density > 0.0 && density < 1.0 {
            let cis_beta = calibrate_beta(1.0, 0.0, density, s, 0.0).unwrap_or(1.0);
            cis.push((d, theory_var_cis(s as f64, d, density, cis_beta)));
        }
    }
    let ln2 = (m as f64).ln().powi(2);
    let title = format!("predicted output variance, s={s}, m={m}; binary wins above d = {:.0}", (s as f64 * ln2).powi(2));
    let mut chart = LineChart::new(title, "d (neurons)", "variance").log_axes(true, true);
    chart.add(format!("binary (beta {beta:.3})"), binary, false);
    chart.add("CiS", cis, true);
    Ok(chart.render(None))
}

/// Readout weights of pair `(i, j)` against the pair's compute weights for a
/// freshly built binary circuit with an AND readout.
#[allow(clippy::too_many_arguments)]
pub fn scatter_svg(
    m: usize,
    d: usize,
    s: usize,
    seed: u64,
    upper: f64,
    lower: f64,
    p: f64,
    bias: f64,
    i: usize,
    j: usize,
) -> Result<String> {
    if m.saturating_mul(d) > MAX_CELLS {
        return Err(Error::config(format!("m * d must not exceed {MAX_CELLS}")));
    }
    let config = ProblemConfig::new(m, d, s, seed)?;
    let mut circuit = build_binary_circuit(&config, &spec(upper, lower, p, bias)?)?;
    circuit.install((i, j), &TruthTable2::AND)?;
    Ok(readout_scatter(&circuit.model, (i, j))?.to_svg(None))
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = truthTable)]
pub fn truth_table(upper: f64, lower: f64, p: f64, bias: f64, s: usize, target: &str) -> std::result::Result<String, JsError> {
    truth_table_json(upper, lower, p, bias, s, target).map_err(js)
}

#[wasm_bindgen(js_name = varianceCurves)]
pub fn variance_curves(
    s: usize,
    m: usize,
    upper: f64,
    lower: f64,
    p: f64,
    d_min: usize,
    d_max: usize,
) -> std::result::Result<String, JsError> {
    variance_svg(s, m, upper, lower, p, d_min, d_max).map_err(js)
}

#[wasm_bindgen(js_name = readoutScatter)]
#[allow(clippy::too_many_arguments)]
pub fn readout_scatter_svg(
    m: usize,
    d: usize,
    s: usize,
    seed: u64,
    upper: f64,
    lower: f64,
    p: f64,
    bias: f64,
    i: usize,
    j: usize,
) -> std::result::Result<String, JsError> {
    scatter_svg(m, d, s, seed, upper, lower, p, bias, i, j).map_err(js)
}
