// SPDX-License-Identifier: MIT OR Apache-2.0

//! Forward/backward pass over a batch, generic over `f32`/`f64`.
//!
//! The objective is the mean case-weighted squared error
//! `L = sum_n sum_{i != j} w_case (z_nij - t_nij)^2 / (B m (m - 1))`.

use std::fmt::Debug;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis, LinalgScalar, ScalarOperand};
use num_traits::Float;

use crate::datagen::SampleBatch;
use crate::error::{Error, Result};
use crate::loss::{Case, CaseErrors, LossWeights};
use crate::model::{ComputeLayer, Model, ReadoutLayer};

pub trait Real: LinalgScalar + Float + ScalarOperand + std::ops::AddAssign + Send + Sync + Debug + 'static {
    fn of(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("finite cast")
    }

    fn f64(self) -> f64 {
        <f64 as num_traits::NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Training-side copy of the model. The compute weights are kept transposed
/// (`m x d`) so that a sparse input sums contiguous rows.
#[derive(Debug, Clone)]
pub(crate) struct Params<T> {
    pub wt: Array2<T>,
    pub b: Array1<T>,
    pub r: Array2<T>,
    pub c: Array1<T>,
}

impl<T: Real> Params<T> {
    pub fn from_model(model: &Model) -> Self {
        Self {
            wt: model.compute.weights.t().mapv(T::of),
            b: model.compute.bias.mapv(T::of),
            r: model.readout.weights.mapv(T::of),
            c: model.readout.bias.mapv(T::of),
        }
    }

    pub fn compute_layer(&self) -> ComputeLayer {
        ComputeLayer {
            weights: self.wt.t().mapv(T::f64),
            bias: self.b.mapv(T::f64),
        }
    }

    pub fn write_into(&self, model: &mut Model) {
        model.compute = self.compute_layer();
        model.readout = ReadoutLayer {
            weights: self.r.mapv(T::f64),
            bias: self.c.mapv(T::f64),
        };
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            wt: Array2::zeros(self.wt.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
            r: Array2::zeros(self.r.raw_dim()),
            c: Array1::zeros(self.c.raw_dim()),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.wt.iter().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
            && self.r.iter().all(|x| x.is_finite())
            && self.c.iter().all(|x| x.is_finite())
    }
}

/// Gradients share the parameter layout.
pub(crate) type Grads<T> = Params<T>;

/// Scratch buffers sized for one batch.
pub(crate) struct Workspace<T> {
    h: Array2<T>,
    y: Array2<T>,
    z: Array2<T>,
    g: Array2<T>,
    dy: Array2<T>,
    mask: Vec<bool>,
}

impl<T: Real> Workspace<T> {
    pub fn new(batch: usize, m: usize, d: usize) -> Self {
        Self {
            h: Array2::zeros((batch, d)),
            y: Array2::zeros((batch, d)),
            z: Array2::zeros((batch, m * m)),
            g: Array2::zeros((batch, m * m)),
            dy: Array2::zeros((batch, d)),
            mask: vec![false; m],
        }
    }

    fn ensure(&mut self, batch: usize, m: usize, d: usize) {
        if self.h.nrows() != batch || self.z.ncols() != m * m || self.h.ncols() != d {
            *self = Self::new(batch, m, d);
        }
    }
}

pub(crate) struct PassOptions<'a> {
    pub compute_grads: bool,
    /// Skip `dW`, `db` (frozen compute layer).
    pub compute_layer: bool,
    pub case_errors: Option<&'a mut CaseErrors>,
}

/// Runs one forward/backward pass, overwriting `grads`. Returns the batch objective.
pub(crate) fn forward_backward<T: Real>(
    params: &Params<T>,
    batch: &SampleBatch,
    weights: &LossWeights,
    grads: &mut Grads<T>,
    ws: &mut Workspace<T>,
    opts: PassOptions<'_>,
) -> T {
    let (m, d) = params.wt.dim();
    let n = batch.len();
    ws.ensure(n, m, d);

    // hidden pre-activations from the sparse inputs
    for (row, active) in batch.rows().enumerate() {
        let mut h = ws.h.row_mut(row);
        h.assign(&params.b);
        for &k in active {
            h += &params.wt.row(k);
        }
    }
    ndarray::Zip::from(&mut ws.y).and(&ws.h).for_each(|y, &h| {
        *y = if h > T::zero() { h } else { T::zero() };
    });

    // z = y R^T + c
    general_mat_mul(T::one(), &ws.y, &params.r.t(), T::zero(), &mut ws.z);
    ws.z += &params.c;

    let pairs = (m * (m - 1)) as f64;
    let scale = T::of(2.0 / (n as f64 * pairs));
    let w = [T::of(weights.w00), T::of(weights.w01), T::of(weights.w11)];
    let mut loss = T::zero();
    let mut case_acc = CaseErrors::default();
    let track = opts.case_errors.is_some();
    for row in 0..n {
        let active = batch.row(row);
        for &k in active {
            ws.mask[k] = true;
        }
        let z = ws.z.row(row);
        let mut g = ws.g.row_mut(row);
        for i in 0..m {
            let vi = ws.mask[i];
            for j in 0..m {
                let p = i * m + j;
                if i == j {
                    g[p] = T::zero();
                    continue;
                }
                let vj = ws.mask[j];
                let case = Case::of(vi, vj).index();
                let e = if vi && vj { z[p] - T::one() } else { z[p] };
                let we = w[case] * e;
                loss += we * e;
                g[p] = scale * we;
                if track {
                    let e = e.f64();
                    case_acc.sum_sq[case] += e * e;
                    case_acc.count[case] += 1;
                }
            }
        }
        for &k in active {
            ws.mask[k] = false;
        }
    }
    if let Some(acc) = opts.case_errors {
        acc.merge(&case_acc);
    }
    let loss = loss / T::of(n as f64 * pairs);
    if !opts.compute_grads {
        return loss;
    }

    // readout gradients
    general_mat_mul(T::one(), &ws.g.t(), &ws.y, T::zero(), &mut grads.r);
    grads.c.assign(&ws.g.sum_axis(Axis(0)));
    if !opts.compute_layer {
        return loss;
    }

    // compute-layer gradients; the ReLU subgradient at 0 is 0
    general_mat_mul(T::one(), &ws.g, &params.r, T::zero(), &mut ws.dy);
    ndarray::Zip::from(&mut ws.dy).and(&ws.h).for_each(|dy, &h| {
        if h <= T::zero() {
            *dy = T::zero();
        }
    });
    grads.wt.fill(T::zero());
    for (row, active) in batch.rows().enumerate() {
        let dh = ws.dy.row(row);
        for &k in active {
            let mut gw = grads.wt.row_mut(k);
            gw += &dh;
        }
    }
    grads.b.assign(&ws.dy.sum_axis(Axis(0)));
    loss
}

/// Exact gradient of the batch objective, reported in model layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    /// `d x m`
    pub d_weights: Array2<f64>,
    pub d_bias: Array1<f64>,
    /// `m^2 x d`
    pub d_readout: Array2<f64>,
    pub d_readout_bias: Array1<f64>,
}

/// Mean case-weighted squared error over `batch` and its analytic gradient.
pub fn backward(model: &Model, batch: &SampleBatch, weights: &LossWeights) -> Result<(f64, GradientBundle)> {
    model.validate()?;
    if batch.m() != model.inputs() {
        return Err(Error::shape(format!(
            "batch has m={}, model has m={}",
            batch.m(),
            model.inputs()
        )));
    }
    let params = Params::<f64>::from_model(model);
    let mut grads = params.zeros_like();
    let mut ws = Workspace::new(batch.len(), model.inputs(), model.neurons());
    let loss = forward_backward(
        &params,
        batch,
        weights,
        &mut grads,
        &mut ws,
        PassOptions {
            compute_grads: true,
            compute_layer: true,
            case_errors: None,
        },
    );
    if !loss.is_finite() || !grads.all_finite() {
        return Err(Error::Numeric(format!("non-finite loss or gradient (loss = {loss})")));
    }
    Ok((
        loss,
        GradientBundle {
            d_weights: grads.wt.t().to_owned(),
            d_bias: grads.b,
            d_readout: grads.r,
            d_readout_bias: grads.c,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemConfig;
    use crate::datagen::sample_batch;
    use crate::loss::compute_loss_weights;
    use crate::model::target;

    #[test]
    fn zero_model_has_no_readout_weight_gradient() {
        let cfg = ProblemConfig::new(6, 4, 3, 1).unwrap();
        let weights = compute_loss_weights(&cfg).unwrap();
        let batch = sample_batch(&cfg, 0, 8).unwrap();
        let (loss, g) = backward(&Model::zeros(6, 4), &batch, &weights).unwrap();
        assert!(loss > 0.0);
        assert!(g.d_readout.iter().all(|&x| x == 0.0));
        assert!(g.d_weights.iter().all(|&x| x == 0.0));
        // dc is nonzero exactly on rows that were active pairs somewhere in the batch
        for i in 0..6 {
            for j in 0..6 {
                let seen = batch.rows().any(|r| i != j && r.contains(&i) && r.contains(&j));
                assert_eq!(g.d_readout_bias[i * 6 + j] != 0.0, seen, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn perfect_model_has_zero_gradient() {
        // one AND neuron per unordered pair
        let m = 3;
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let mut model = Model::zeros(m, pairs.len());
        for (k, &(i, j)) in pairs.iter().enumerate() {
            model.compute.weights[[k, i]] = 1.0;
            model.compute.weights[[k, j]] = 1.0;
            model.compute.bias[k] = -1.0;
            model.readout.weights[[i * m + j, k]] = 1.0;
            model.readout.weights[[j * m + i, k]] = 1.0;
        }
        let cfg = ProblemConfig::new(m, 3, 2, 0).unwrap();
        let batch = sample_batch(&cfg, 0, 16).unwrap();
        for n in 0..batch.len() {
            let v = batch.dense_row(n);
            let (_, z) = model.forward(&v).unwrap();
            let t = target(&v);
            for p in 0..m * m {
                if p % (m + 1) != 0 {
                    assert_eq!(z[p], t[p]);
                }
            }
        }
        let (loss, g) = backward(&model, &batch, &LossWeights::uniform()).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.d_weights.iter().chain(g.d_readout.iter()).all(|&x| x == 0.0));
        assert!(g.d_bias.iter().chain(g.d_readout_bias.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_mismatched_batch() {
        let cfg = ProblemConfig::new(5, 2, 2, 0).unwrap();
        let batch = sample_batch(&cfg, 0, 2).unwrap();
        assert!(backward(&Model::zeros(4, 2), &batch, &LossWeights::uniform()).is_err());
    }
}
