// SPDX-License-Identifier: MIT OR Apache-2.0

//! Analytic model builders.
//!
//! For a distinguished ordered pair `(i, j)` every neuron of a two-valued
//! weight matrix falls into one of four classes according to the weights it
//! gives those two inputs. With interference ignored each class responds to
//! the four input cases with a fixed truth table, and any 2-input boolean
//! function is a linear combination of the four class tables whenever they
//! are linearly independent. Averaging each class and scaling by the solved
//! coefficient gives the readout row.

mod probe;

use std::fmt;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use probe::{fit_pair_readout, PairReadout, ProbeConfig};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{relu, ComputeLayer, Model, ModelMetadata, ModelOrigin};
use crate::rng::{self, Domain};
use crate::training::{init_model, InitSpec};

/// Condition number above which a class system is treated as degenerate.
pub const MAX_CONDITION: f64 = 1e12;

/// Input cases `(v_i, v_j)` in table order.
pub const CASES: [(bool, bool); 4] = [(false, false), (false, true), (true, false), (true, true)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeuronClass {
    /// `(u, u)`
    A,
    /// `(u, l)`
    B1,
    /// `(l, u)`
    B2,
    /// `(l, l)`
    C,
}

impl NeuronClass {
    pub const ALL: [NeuronClass; 4] = [NeuronClass::A, NeuronClass::B1, NeuronClass::B2, NeuronClass::C];

    pub fn from_upper(upper_i: bool, upper_j: bool) -> Self {
        match (upper_i, upper_j) {
            (true, true) => NeuronClass::A,
            (true, false) => NeuronClass::B1,
            (false, true) => NeuronClass::B2,
            (false, false) => NeuronClass::C,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the neuron uses the upper weight on input `i` and on input `j`.
    pub fn upper(self) -> (bool, bool) {
        match self {
            NeuronClass::A => (true, true),
            NeuronClass::B1 => (true, false),
            NeuronClass::B2 => (false, true),
            NeuronClass::C => (false, false),
        }
    }

    /// The class seen from the swapped pair `(j, i)`.
    pub fn swapped(self) -> Self {
        let (a, b) = self.upper();
        Self::from_upper(b, a)
    }
}

impl fmt::Display for NeuronClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NeuronClass::A => "A",
            NeuronClass::B1 => "B1",
            NeuronClass::B2 => "B2",
            NeuronClass::C => "C",
        };
        f.write_str(name)
    }
}

/// Two-valued weight distribution: `u` with probability `p`, else `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryWeightSpec {
    pub upper: f64,
    pub lower: f64,
    pub p: f64,
    pub bias: f64,
}

impl BinaryWeightSpec {
    /// `u = 0.1`, `l = -0.25`, `p = 0.75`, `b = 0.05`.
    pub const REPRESENTATIVE: BinaryWeightSpec = BinaryWeightSpec {
        upper: 0.1,
        lower: -0.25,
        p: 0.75,
        bias: 0.05,
    };

    pub fn validate(&self) -> Result<()> {
        let finite = [self.upper, self.lower, self.p, self.bias].iter().all(|x| x.is_finite());
        if !finite || self.lower > self.upper || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::config(format!("invalid binary weight spec {self:?}")));
        }
        Ok(())
    }

    pub fn class_weights(&self, class: NeuronClass) -> (f64, f64) {
        let pick = |up: bool| if up { self.upper } else { self.lower };
        let (a, b) = class.upper();
        (pick(a), pick(b))
    }

    pub fn row_mean(&self) -> f64 {
        self.upper * self.p + self.lower * (1.0 - self.p)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            upper: self.upper * alpha,
            lower: self.lower * alpha,
            bias: self.bias * alpha,
            p: self.p,
        }
    }
}

/// Target values of a 2-input boolean function, in [`CASES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthTable2 {
    pub t00: f64,
    pub t01: f64,
    pub t10: f64,
    pub t11: f64,
}

impl TruthTable2 {
    pub const AND: TruthTable2 = TruthTable2::new(0.0, 0.0, 0.0, 1.0);
    pub const XOR: TruthTable2 = TruthTable2::new(0.0, 1.0, 1.0, 0.0);
    pub const OR: TruthTable2 = TruthTable2::new(0.0, 1.0, 1.0, 1.0);
    /// `v_i` alone.
    pub const FIRST: TruthTable2 = TruthTable2::new(0.0, 0.0, 1.0, 1.0);
    pub const ZERO: TruthTable2 = TruthTable2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(t00: f64, t01: f64, t10: f64, t11: f64) -> Self {
        Self { t00, t01, t10, t11 }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.t00, self.t01, self.t10, self.t11]
    }

    pub fn value(&self, vi: bool, vj: bool) -> f64 {
        match (vi, vj) {
            (false, false) => self.t00,
            (false, true) => self.t01,
            (true, false) => self.t10,
            (true, true) => self.t11,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "and" => Some(Self::AND),
            "xor" => Some(Self::XOR),
            "or" => Some(Self::OR),
            "first" | "v1" => Some(Self::FIRST),
            "zero" => Some(Self::ZERO),
            _ => None,
        }
    }
}

/// Mean activation per (input case, neuron class); `values[case][class]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassTruthTable {
    pub values: [[f64; 4]; 4],
}

impl ClassTruthTable {
    pub fn get(&self, case: usize, class: NeuronClass) -> f64 {
        self.values[case][class.index()]
    }

    /// Output of a class combination for every input case.
    pub fn combine(&self, coefficients: &ClassCoefficients) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (case, row) in self.values.iter().enumerate() {
            out[case] = row.iter().zip(coefficients).map(|(a, c)| a * c).sum();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("vi,vj,A,B1,B2,C\n");
        for (case, (vi, vj)) in CASES.iter().enumerate() {
            let row = self.values[case];
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                *vi as u8, *vj as u8, row[0], row[1], row[2], row[3]
            ));
        }
        s
    }
}

/// Per-class readout coefficients in `A, B1, B2, C` order.
pub type ClassCoefficients = [f64; 4];

/// Noiseless class truth table `ReLU(w_i v_i + w_j v_j + b)`.
pub fn class_truth_table(spec: &BinaryWeightSpec) -> ClassTruthTable {
    let mut values = [[0.0; 4]; 4];
    for (case, &(vi, vj)) in CASES.iter().enumerate() {
        for class in NeuronClass::ALL {
            let (wi, wj) = spec.class_weights(class);
            let pre = wi * f64::from(u8::from(vi)) + wj * f64::from(u8::from(vj)) + spec.bias;
            values[case][class.index()] = relu(pre);
        }
    }
    ClassTruthTable { values }
}

/// Coefficients reproducing `target` from the four class tables.
pub fn solve_readout(table: &ClassTruthTable, target: &TruthTable2) -> Result<ClassCoefficients> {
    let cond = linalg::condition_number(&table.values);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::Degenerate(format!(
            "class truth table is singular or ill-conditioned (condition number {cond:e})"
        )));
    }
    linalg::solve(&table.values, &target.values())
        .ok_or_else(|| Error::Degenerate("class truth table is singular".into()))
}

/// Which of the two weight values each `(neuron, input)` entry took.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAssignment {
    /// `d x m`, true where the weight is the upper value.
    pub upper: Array2<bool>,
}

impl ClassAssignment {
    pub fn class_of(&self, neuron: usize, i: usize, j: usize) -> NeuronClass {
        NeuronClass::from_upper(self.upper[[neuron, i]], self.upper[[neuron, j]])
    }

    pub fn classes(&self, i: usize, j: usize) -> Vec<NeuronClass> {
        (0..self.upper.nrows()).map(|k| self.class_of(k, i, j)).collect()
    }

    pub fn counts(&self, i: usize, j: usize) -> [usize; 4] {
        class_counts(&self.classes(i, j))
    }
}

pub fn class_counts(classes: &[NeuronClass]) -> [usize; 4] {
    let mut counts = [0; 4];
    for c in classes {
        counts[c.index()] += 1;
    }
    counts
}

/// Writes the class-mean readout for ordered pair `(i, j)`:
/// `R[(i,j), k] = coef[class_k] / count[class_k]`, and sets `c` so the
/// noiseless `(0,0)` case reads 0.
pub fn install_readout(
    model: &mut Model,
    classes: &[NeuronClass],
    pair: (usize, usize),
    coefficients: &ClassCoefficients,
    table: &ClassTruthTable,
) -> Result<()> {
    let (i, j) = pair;
    let m = model.inputs();
    if i >= m || j >= m || i == j {
        return Err(Error::config(format!("invalid pair ({i}, {j}) for m={m}")));
    }
    if classes.len() != model.neurons() {
        return Err(Error::shape("class list length differs from neuron count"));
    }
    let counts = class_counts(classes);
    for class in NeuronClass::ALL {
        if counts[class.index()] == 0 && coefficients[class.index()] != 0.0 {
            return Err(Error::EmptyClass(class, i, j));
        }
    }
    let row = i * m + j;
    let mut readout = model.readout.weights.row_mut(row);
    for (k, class) in classes.iter().enumerate() {
        let c = class.index();
        readout[k] = if counts[c] == 0 { 0.0 } else { coefficients[c] / counts[c] as f64 };
    }
    model.readout.bias[row] = -table.values[0].iter().zip(coefficients).map(|(a, c)| a * c).sum::<f64>();
    Ok(())
}

/// Binary weighted circuit with its per-entry class record.
#[derive(Debug, Clone)]
pub struct BinaryCircuit {
    pub model: Model,
    pub assignment: ClassAssignment,
    pub spec: BinaryWeightSpec,
}

impl BinaryCircuit {
    pub fn table(&self) -> ClassTruthTable {
        class_truth_table(&self.spec)
    }

    pub fn install(&mut self, pair: (usize, usize), target: &TruthTable2) -> Result<ClassCoefficients> {
        let table = self.table();
        let coefficients = solve_readout(&table, target)?;
        let classes = self.assignment.classes(pair.0, pair.1);
        install_readout(&mut self.model, &classes, pair, &coefficients, &table)?;
        Ok(coefficients)
    }

    /// Installs `target` on every off-diagonal ordered pair.
    pub fn install_all(&mut self, target: &TruthTable2) -> Result<ClassCoefficients> {
        let table = self.table();
        let coefficients = solve_readout(&table, target)?;
        let m = self.model.inputs();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let classes = self.assignment.classes(i, j);
                    install_readout(&mut self.model, &classes, (i, j), &coefficients, &table)?;
                }
            }
        }
        Ok(coefficients)
    }
}

fn construction_metadata(config: &ProblemConfig, kind: &str, extra: serde_json::Value) -> ModelMetadata {
    ModelMetadata {
        seed: config.seed,
        origin: ModelOrigin::Construction,
        construction: Some(kind.to_owned()),
        config: Some(serde_json::json!({ "problem": config, "construction": extra })),
        version: env!("CARGO_PKG_VERSION").to_owned(),
    }
}

fn draw_assignment(config: &ProblemConfig, p: f64, stream: u64) -> ClassAssignment {
    let mut rng = rng::stream(config.seed, Domain::Construction, stream);
    ClassAssignment {
        upper: Array2::from_shape_simple_fn((config.d, config.m), || rng.gen_bool(p)),
    }
}

/// Each `W_ij` is independently `u` with probability `p`, else `l`; `b_i = bias`.
/// The readout starts at zero.
pub fn build_binary_circuit(config: &ProblemConfig, spec: &BinaryWeightSpec) -> Result<BinaryCircuit> {
    config.validate()?;
    spec.validate()?;
    let assignment = draw_assignment(config, spec.p, 0);
    let weights = assignment.upper.mapv(|up| if up { spec.upper } else { spec.lower });
    let mut model = Model::from_compute(ComputeLayer {
        weights,
        bias: Array1::from_elem(config.d, spec.bias),
    });
    model.metadata = construction_metadata(config, "binary", serde_json::to_value(spec)?);
    Ok(BinaryCircuit {
        model,
        assignment,
        spec: *spec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CisConfig {
    /// Base of the logarithm in `p = log^2 m / sqrt d`; `None` is natural log.
    pub log_base: Option<f64>,
    /// Neuron bias. `-1` makes a class-A neuron fire only when both inputs are on.
    pub bias: f64,
}

impl Default for CisConfig {
    fn default() -> Self {
        Self {
            log_base: None,
            bias: -1.0,
        }
    }
}

impl CisConfig {
    pub fn density(&self, m: usize, d: usize) -> f64 {
        let log = match self.log_base {
            Some(base) => (m as f64).ln() / base.ln(),
            None => (m as f64).ln(),
        };
        log * log / (d as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct CisConstruction {
    pub model: Model,
    pub assignment: ClassAssignment,
    pub p: f64,
}

/// Sparse 0/1 construction with ones at density `log^2 m / sqrt d`.
///
/// The readout of each pair is the mean of its class-A neurons (both weights
/// 1), affinely calibrated so the noiseless `(0,0)` case reads 0 and `(1,1)`
/// reads 1.
pub fn build_cis_construction(config: &ProblemConfig, cis: &CisConfig) -> Result<CisConstruction> {
    config.validate()?;
    let p = cis.density(config.m, config.d);
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::config(format!(
            "CiS density log^2 m / sqrt d = {p:.4} must lie in (0, 1] (m={}, d={})",
            config.m, config.d
        )));
    }
    let low = relu(cis.bias);
    let high = relu(2.0 + cis.bias);
    if high == low {
        return Err(Error::Degenerate(format!("CiS bias {} silences class A", cis.bias)));
    }
    let scale = 1.0 / (high - low);
    let assignment = draw_assignment(config, p, 1);
    let weights = assignment.upper.mapv(|up| if up { 1.0 } else { 0.0 });
    let mut model = Model::from_compute(ComputeLayer {
        weights,
        bias: Array1::from_elem(config.d, cis.bias),
    });
    let m = config.m;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let classes = assignment.classes(i, j);
            let count_a = class_counts(&classes)[NeuronClass::A.index()];
            if count_a == 0 {
                return Err(Error::EmptyClass(NeuronClass::A, i, j));
            }
            let row = i * m + j;
            let mut readout = model.readout.weights.row_mut(row);
            for (k, class) in classes.iter().enumerate() {
                if *class == NeuronClass::A {
                    readout[k] = scale / count_a as f64;
                }
            }
            model.readout.bias[row] = -scale * low;
        }
    }
    model.metadata = construction_metadata(config, "cis", serde_json::json!({ "p": p, "cis": cis }));
    Ok(CisConstruction { model, assignment, p })
}

/// Random compute layer drawn exactly as a training run would initialise it,
/// with a zero readout.
pub fn build_frozen_random(config: &ProblemConfig, init: &InitSpec) -> Result<Model> {
    let drawn = init_model(config, init)?;
    let mut model = Model::from_compute(drawn.compute);
    model.metadata = construction_metadata(config, "frozen_random", serde_json::to_value(init)?);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: BinaryWeightSpec = BinaryWeightSpec::REPRESENTATIVE;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn representative_table() {
        let t = class_truth_table(&SPEC);
        let expected = [
            [0.05, 0.05, 0.05, 0.05],
            [0.15, 0.0, 0.15, 0.0],
            [0.15, 0.15, 0.0, 0.0],
            [0.25, 0.0, 0.0, 0.0],
        ];
        for case in 0..4 {
            for class in 0..4 {
                assert!(close(t.values[case][class], expected[case][class], 1e-12));
            }
        }
    }

    #[test]
    fn zero_bias_silences_the_00_case() {
        let t = class_truth_table(&BinaryWeightSpec { bias: 0.0, ..SPEC });
        assert!(t.values[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn and_and_xor_coefficients() {
        let t = class_truth_table(&SPEC);
        let and = solve_readout(&t, &TruthTable2::AND).unwrap();
        for (got, want) in and.iter().zip([4.0, -4.0, -4.0, 4.0]) {
            assert!(close(*got, want, 1e-10), "{and:?}");
        }
        let xor = solve_readout(&t, &TruthTable2::XOR).unwrap();
        for (got, want) in xor.iter().zip([0.0, 20.0 / 3.0, 20.0 / 3.0, -40.0 / 3.0]) {
            assert!(close(*got, want, 1e-10), "{xor:?}");
        }
        assert_eq!(solve_readout(&t, &TruthTable2::ZERO).unwrap(), [0.0; 4]);
    }

    #[test]
    fn first_input_coefficients_have_swapped_b_roles() {
        // 4A + (8/3)B1 - 4B2 - (8/3)C: the B1/B2 labels are exchanged relative to
        // a 4A - 4B1 + (8/3)B2 - (8/3)C reading
        let t = class_truth_table(&SPEC);
        let first = solve_readout(&t, &TruthTable2::FIRST).unwrap();
        let want = [4.0, 8.0 / 3.0, -4.0, -8.0 / 3.0];
        for (got, want) in first.iter().zip(want) {
            assert!(close(*got, want, 1e-10), "{first:?}");
        }
        let swapped = [first[0], first[2], first[1], first[3]];
        for (got, want) in swapped.iter().zip([4.0, -4.0, 8.0 / 3.0, -8.0 / 3.0]) {
            assert!(close(*got, want, 1e-10));
        }
    }

    #[test]
    fn collinear_classes_are_degenerate() {
        // u = l makes all four classes identical
        let spec = BinaryWeightSpec {
            upper: 0.1,
            lower: 0.1,
            p: 0.5,
            bias: 0.05,
        };
        assert!(matches!(
            solve_readout(&class_truth_table(&spec), &TruthTable2::AND),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn all_upper_when_p_is_one() {
        let cfg = ProblemConfig::new(6, 20, 2, 3).unwrap();
        let c = build_binary_circuit(&cfg, &BinaryWeightSpec { p: 1.0, ..SPEC }).unwrap();
        assert!(c.model.compute.weights.iter().all(|&w| w == SPEC.upper));
        assert_eq!(c.assignment.counts(0, 1), [20, 0, 0, 0]);
    }

    #[test]
    fn class_a_proportion_matches_p_squared() {
        let cfg = ProblemConfig::new(100, 1000, 3, 9).unwrap();
        let c = build_binary_circuit(&cfg, &SPEC).unwrap();
        let p2 = SPEC.p * SPEC.p;
        let sigma = (p2 * (1.0 - p2) / 1000.0).sqrt();
        for (i, j) in [(0, 1), (5, 17), (98, 3)] {
            let frac = c.assignment.counts(i, j)[0] as f64 / 1000.0;
            assert!((frac - p2).abs() < 3.0 * sigma, "pair ({i},{j}) frac {frac}");
        }
        assert!(close(SPEC.row_mean(), 0.0125, 1e-15));
    }

    #[test]
    fn single_class_a_neuron_weight() {
        let mut model = Model::zeros(3, 4);
        let classes = [NeuronClass::A, NeuronClass::B1, NeuronClass::B2, NeuronClass::C];
        let table = class_truth_table(&SPEC);
        install_readout(&mut model, &classes, (0, 1), &[4.0, -4.0, -4.0, 4.0], &table).unwrap();
        assert_eq!(model.readout.weights[[1, 0]], 4.0);
        assert_eq!(model.readout.weights[[1, 1]], -4.0);
    }

    #[test]
    fn empty_class_is_named() {
        let mut model = Model::zeros(3, 2);
        let classes = [NeuronClass::A, NeuronClass::C];
        let table = class_truth_table(&SPEC);
        let err = install_readout(&mut model, &classes, (0, 2), &[4.0, -4.0, -4.0, 4.0], &table).unwrap_err();
        assert!(matches!(err, Error::EmptyClass(NeuronClass::B1, 0, 2)), "{err}");
    }

    #[test]
    fn noiseless_installed_readout_is_exact() {
        let cfg = ProblemConfig::new(5, 256, 2, 4).unwrap();
        let mut c = build_binary_circuit(&cfg, &SPEC).unwrap();
        c.install((1, 3), &TruthTable2::AND).unwrap();
        for &(vi, vj) in &CASES {
            let mut v = vec![0.0; 5];
            v[1] = f64::from(u8::from(vi));
            v[3] = f64::from(u8::from(vj));
            let (_, z) = c.model.forward(&v).unwrap();
            let want = TruthTable2::AND.value(vi, vj);
            assert!(close(z[1 * 5 + 3], want, 1e-12), "case ({vi},{vj}) -> {}", z[8]);
        }
    }

    #[test]
    fn cis_density_examples() {
        let p = CisConfig::default().density(100, 10_000);
        assert!(close(p, 100f64.ln().powi(2) / 100.0, 1e-15));
        assert!(close(p, 0.2121, 1e-4));
        let e_base = CisConfig {
            log_base: Some(std::f64::consts::E),
            ..CisConfig::default()
        };
        assert!(close(e_base.density(100, 400), 100f64.ln().powi(2) / 20.0, 1e-12));
        // natural log of m = e is exactly 1 when using m as the log base
        let unit = CisConfig {
            log_base: Some(7.0),
            ..CisConfig::default()
        };
        assert!(close(unit.density(7, 400), 1.0 / 20.0, 1e-12));
        let cfg = ProblemConfig::new(100, 16, 3, 0).unwrap();
        assert!(matches!(build_cis_construction(&cfg, &CisConfig::default()), Err(Error::Config(_))));
    }

    #[test]
    fn cis_class_a_count_within_binomial_bound() {
        let cfg = ProblemConfig::new(100, 10_000, 3, 2).unwrap();
        let cis = build_cis_construction(&cfg, &CisConfig::default()).unwrap();
        let p2 = cis.p * cis.p;
        let n = 10_000.0;
        let sigma = (n * p2 * (1.0 - p2)).sqrt();
        let count = cis.assignment.counts(4, 9)[0] as f64;
        assert!((count - n * p2).abs() < 3.0 * sigma, "count {count}, expected {}", n * p2);
        let ones_per_row = cis.model.compute.weights.row(0).sum();
        assert!((ones_per_row - 100.0 * cis.p).abs() < 4.0 * (100.0 * cis.p * (1.0 - cis.p)).sqrt());
    }

    #[test]
    fn cis_noiseless_readout_is_and() {
        let cfg = ProblemConfig::new(6, 400, 2, 1).unwrap();
        let cis = build_cis_construction(&cfg, &CisConfig::default()).unwrap();
        for &(vi, vj) in &CASES {
            let mut v = vec![0.0; 6];
            v[2] = f64::from(u8::from(vi));
            v[4] = f64::from(u8::from(vj));
            let (_, z) = cis.model.forward(&v).unwrap();
            assert!(close(z[2 * 6 + 4], TruthTable2::AND.value(vi, vj), 1e-12));
        }
    }

    #[test]
    fn frozen_random_matches_training_init() {
        let cfg = ProblemConfig::new(8, 16, 2, 77).unwrap();
        let a = build_frozen_random(&cfg, &InitSpec::default()).unwrap();
        let b = build_frozen_random(&cfg, &InitSpec::default()).unwrap();
        assert_eq!(a.compute, b.compute);
        assert_eq!(a.compute, init_model(&cfg, &InitSpec::default()).unwrap().compute);
        assert!(a.readout.weights.iter().all(|&x| x == 0.0));
        assert_eq!(a.metadata.construction.as_deref(), Some("frozen_random"));
    }
}
