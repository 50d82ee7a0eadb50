// SPDX-License-Identifier: MIT OR Apache-2.0

//! The two-layer Universal-AND model and its JSON format.
//!
//! `y = ReLU(W v + b)` is the compute layer, `z = R y + c` the readout. The
//! readout has one row per ordered pair `(i, j)` at index `i * m + j`;
//! diagonal rows are carried for indexing convenience and never trained or
//! scored.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComputeLayer {
    /// `d x m`, row `k` holds neuron `k`'s input weights.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutLayer {
    /// `m^2 x d`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelOrigin {
    Trained,
    Construction,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub origin: ModelOrigin,
    /// `binary`, `cis` or `frozen_random` for analytic builders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default)]
    pub version: String,
}

impl Default for ModelMetadata {
    fn default() -> Self {
        Self {
            seed: 0,
            origin: ModelOrigin::Manual,
            construction: None,
            config: None,
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub compute: ComputeLayer,
    pub readout: ReadoutLayer,
    pub metadata: ModelMetadata,
}

impl Model {
    pub fn zeros(m: usize, d: usize) -> Self {
        Self {
            compute: ComputeLayer {
                weights: Array2::zeros((d, m)),
                bias: Array1::zeros(d),
            },
            readout: ReadoutLayer {
                weights: Array2::zeros((m * m, d)),
                bias: Array1::zeros(m * m),
            },
            metadata: ModelMetadata::default(),
        }
    }

    pub fn from_compute(compute: ComputeLayer) -> Self {
        let (d, m) = compute.weights.dim();
        Self {
            compute,
            readout: ReadoutLayer {
                weights: Array2::zeros((m * m, d)),
                bias: Array1::zeros(m * m),
            },
            metadata: ModelMetadata::default(),
        }
    }

    pub fn inputs(&self) -> usize {
        self.compute.weights.ncols()
    }

    pub fn neurons(&self) -> usize {
        self.compute.weights.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (d, m) = self.compute.weights.dim();
        if self.compute.bias.len() != d {
            return Err(Error::shape(format!("b has length {}, expected {d}", self.compute.bias.len())));
        }
        if self.readout.weights.dim() != (m * m, d) {
            return Err(Error::shape(format!(
                "R is {:?}, expected {:?}",
                self.readout.weights.dim(),
                (m * m, d)
            )));
        }
        if self.readout.bias.len() != m * m {
            return Err(Error::shape(format!("c has length {}, expected {}", self.readout.bias.len(), m * m)));
        }
        let finite = self.compute.weights.iter().all(|x| x.is_finite())
            && self.compute.bias.iter().all(|x| x.is_finite())
            && self.readout.weights.iter().all(|x| x.is_finite())
            && self.readout.bias.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Numeric("model contains non-finite parameters".into()));
        }
        Ok(())
    }

    pub fn check_config(&self, config: &ProblemConfig) -> Result<()> {
        if self.inputs() != config.m || self.neurons() != config.d {
            return Err(Error::shape(format!(
                "model is m={}, d={} but config has m={}, d={}",
                self.inputs(),
                self.neurons(),
                config.m,
                config.d
            )));
        }
        Ok(())
    }

    /// Hidden activations for a dense 0/1 input.
    pub fn hidden(&self, v: &[f64]) -> Result<Array1<f64>> {
        if v.len() != self.inputs() {
            return Err(Error::shape(format!("input has length {}, expected {}", v.len(), self.inputs())));
        }
        let pre = self.compute.weights.dot(&ArrayView1::from(v)) + &self.compute.bias;
        Ok(pre.mapv_into(relu))
    }

    /// Hidden activations for an input given by its active indices.
    pub fn hidden_sparse(&self, active: &[usize]) -> Array1<f64> {
        let mut pre = self.compute.bias.clone();
        for &k in active {
            pre += &self.compute.weights.column(k);
        }
        pre.mapv_into(relu)
    }

    pub fn forward(&self, v: &[f64]) -> Result<(Array1<f64>, Array1<f64>)> {
        self.validate_shapes()?;
        let y = self.hidden(v)?;
        let z = self.readout.weights.dot(&y) + &self.readout.bias;
        Ok((y, z))
    }

    /// Readout for a single ordered pair without computing the other rows.
    pub fn readout_pair(&self, y: &Array1<f64>, i: usize, j: usize) -> f64 {
        let row = i * self.inputs() + j;
        self.readout.weights.row(row).dot(y) + self.readout.bias[row]
    }

    fn validate_shapes(&self) -> Result<()> {
        let (d, m) = self.compute.weights.dim();
        if self.compute.bias.len() != d || self.readout.weights.dim() != (m * m, d) || self.readout.bias.len() != m * m {
            return Err(Error::shape("inconsistent layer shapes"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let json = self.to_json().map_err(std::io::Error::other)?;
        std::fs::write(path, json)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Universal-AND target: entry `i*m+j` is `v_i AND v_j` off the diagonal, 0 on it.
pub fn target(v: &[f64]) -> Array1<f64> {
    let m = v.len();
    let mut t = Array1::zeros(m * m);
    for i in 0..m {
        if v[i] == 0.0 {
            continue;
        }
        for j in 0..m {
            if i != j && v[j] != 0.0 {
                t[i * m + j] = 1.0;
            }
        }
    }
    t
}

/// On-disk layout: row-major matrices plus metadata.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    m: usize,
    d: usize,
    #[serde(rename = "W")]
    w: Vec<f64>,
    b: Vec<f64>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    c: Vec<f64>,
    metadata: ModelMetadata,
}

impl From<&Model> for ModelFile {
    fn from(model: &Model) -> Self {
        Self {
            m: model.inputs(),
            d: model.neurons(),
            w: model.compute.weights.iter().copied().collect(),
            b: model.compute.bias.to_vec(),
            r: model.readout.weights.iter().copied().collect(),
            c: model.readout.bias.to_vec(),
            metadata: model.metadata.clone(),
        }
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let (m, d) = (f.m, f.d);
        let weights = Array2::from_shape_vec((d, m), f.w).map_err(|e| Error::shape(format!("W: {e}")))?;
        let readout = Array2::from_shape_vec((m * m, d), f.r).map_err(|e| Error::shape(format!("R: {e}")))?;
        let model = Model {
            compute: ComputeLayer {
                weights,
                bias: Array1::from(f.b),
            },
            readout: ReadoutLayer {
                weights: readout,
                bias: Array1::from(f.c),
            },
            metadata: f.metadata,
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_model_outputs_zero() {
        let model = Model::zeros(5, 3);
        let (y, z) = model.forward(&[1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(y.iter().all(|&x| x == 0.0));
        assert!(z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_neuron_exact_and() {
        let mut model = Model::zeros(2, 1);
        model.compute.weights[[0, 0]] = 1.0;
        model.compute.weights[[0, 1]] = 1.0;
        model.compute.bias[0] = -1.0;
        model.readout.weights[[1, 0]] = 1.0;
        let (y, z) = model.forward(&[1.0, 1.0]).unwrap();
        assert_eq!(y[0], 1.0);
        assert_eq!(z[1], 1.0);
        let (_, z) = model.forward(&[1.0, 0.0]).unwrap();
        assert_eq!(z[1], 0.0);
    }

    #[test]
    fn forward_rejects_wrong_length() {
        assert!(Model::zeros(3, 2).forward(&[1.0, 0.0]).is_err());
        let mut bad = Model::zeros(3, 2);
        bad.readout.bias = Array1::zeros(4);
        assert!(bad.forward(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn target_examples() {
        assert!(target(&[0.0; 4]).iter().all(|&x| x == 0.0));
        let t = target(&[1.0, 1.0, 0.0]);
        let ones: Vec<usize> = t.iter().enumerate().filter(|(_, &x)| x == 1.0).map(|(k, _)| k).collect();
        assert_eq!(ones, vec![1, 3]);
        assert_eq!(target(&[1.0, 1.0, 1.0, 0.0]).sum(), 6.0);
    }

    #[test]
    fn json_round_trip_preserves_bits() {
        let mut model = Model::zeros(3, 2);
        model.compute.weights[[1, 2]] = 0.1 + 0.2;
        model.readout.weights[[5, 1]] = -1.0 / 3.0;
        model.readout.bias[7] = 1e-300;
        let back = Model::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn json_rejects_inconsistent_shapes() {
        let text = r#"{"m":2,"d":1,"W":[1.0],"b":[0.0],"R":[0,0,0,0],"c":[0,0,0,0],
            "metadata":{"seed":0,"origin":"manual"}}"#;
        assert!(Model::from_json(text).is_err());
    }

    fn binary_vec(m: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0)], m)
    }

    proptest! {
        #[test]
        fn target_is_symmetric_with_a_times_a_minus_one_ones(v in binary_vec(7)) {
            let t = target(&v);
            let a = v.iter().sum::<f64>();
            prop_assert_eq!(t.sum(), a * (a - 1.0));
            for i in 0..7 {
                prop_assert_eq!(t[i * 7 + i], 0.0);
                for j in 0..7 {
                    prop_assert_eq!(t[i * 7 + j], t[j * 7 + i]);
                }
            }
        }

        #[test]
        fn readout_scaling_scales_output(
            v in binary_vec(4),
            seed in 0u64..1000,
            alpha in 0.01f64..100.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut model = Model::zeros(4, 3);
            model.compute.weights.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
            model.compute.bias.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
            model.readout.weights.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
            model.readout.bias.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
            let (_, z) = model.forward(&v).unwrap();
            let mut scaled = model.clone();
            scaled.readout.weights *= alpha;
            scaled.readout.bias *= alpha;
            let (_, zs) = scaled.forward(&v).unwrap();
            for (a, b) in z.iter().zip(zs.iter()) {
                prop_assert!((a * alpha - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
