// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{ArrayViewMut, Dimension, Zip};
use serde::{Deserialize, Serialize};

use super::backward::{Grads, Params, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Which parameter groups an optimizer step may touch.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepMask {
    pub compute: bool,
    pub readout_bias: bool,
}

/// Adam or SGD with decoupled weight decay on `W` and `R` (biases are not decayed).
pub(crate) struct Optimizer<T> {
    kind: OptimizerKind,
    lr: T,
    decay: T,
    step: i32,
    first: Option<Params<T>>,
    second: Option<Params<T>>,
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind, lr: f64, weight_decay: f64, like: &Params<T>) -> Self {
        let moments = matches!(kind, OptimizerKind::Adam { .. });
        Self {
            kind,
            lr: T::of(lr),
            decay: T::of(weight_decay),
            step: 0,
            first: moments.then(|| like.zeros_like()),
            second: moments.then(|| like.zeros_like()),
        }
    }

    pub fn step(&mut self, params: &mut Params<T>, grads: &Grads<T>, mask: StepMask) {
        self.step += 1;
        let lr = self.lr;
        let wd = self.decay;
        match self.kind {
            OptimizerKind::Sgd => {
                let sgd = |p: ArrayViewMut<T, _>, g, decay: T| sgd_update(p, g, lr, decay);
                if mask.compute {
                    sgd(params.wt.view_mut().into_dyn(), grads.wt.view().into_dyn(), wd);
                    sgd(params.b.view_mut().into_dyn(), grads.b.view().into_dyn(), T::zero());
                }
                sgd(params.r.view_mut().into_dyn(), grads.r.view().into_dyn(), wd);
                if mask.readout_bias {
                    sgd(params.c.view_mut().into_dyn(), grads.c.view().into_dyn(), T::zero());
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let hyper = AdamHyper {
                    lr,
                    beta1: T::of(beta1),
                    beta2: T::of(beta2),
                    eps: T::of(eps),
                    bias1: T::one() - T::of(beta1).powi(self.step),
                    bias2: T::one() - T::of(beta2).powi(self.step),
                };
                let (m1, m2) = (self.first.as_mut().unwrap(), self.second.as_mut().unwrap());
                if mask.compute {
                    adam_update(&mut params.wt, &grads.wt, &mut m1.wt, &mut m2.wt, &hyper, wd);
                    adam_update(&mut params.b, &grads.b, &mut m1.b, &mut m2.b, &hyper, T::zero());
                }
                adam_update(&mut params.r, &grads.r, &mut m1.r, &mut m2.r, &hyper, wd);
                if mask.readout_bias {
                    adam_update(&mut params.c, &grads.c, &mut m1.c, &mut m2.c, &hyper, T::zero());
                }
            }
        }
    }
}

fn sgd_update<T: Real, D: Dimension>(p: ArrayViewMut<T, D>, g: ndarray::ArrayView<T, D>, lr: T, decay: T) {
    Zip::from(p).and(g).for_each(|p, &g| {
        *p = *p - lr * (g + decay * *p);
    });
}

struct AdamHyper<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    bias1: T,
    bias2: T,
}

fn adam_update<T: Real, D: Dimension>(
    p: &mut ndarray::Array<T, D>,
    g: &ndarray::Array<T, D>,
    m1: &mut ndarray::Array<T, D>,
    m2: &mut ndarray::Array<T, D>,
    h: &AdamHyper<T>,
    decay: T,
) {
    let one = T::one();
    Zip::from(p).and(g).and(m1).and(m2).for_each(|p, &g, m, v| {
        *m = h.beta1 * *m + (one - h.beta1) * g;
        *v = h.beta2 * *v + (one - h.beta2) * g * g;
        let mhat = *m / h.bias1;
        let vhat = *v / h.bias2;
        *p = *p - h.lr * (mhat / (vhat.sqrt() + h.eps) + decay * *p);
    });
}
