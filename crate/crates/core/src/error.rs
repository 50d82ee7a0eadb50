// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

use crate::constructions::NeuronClass;
use crate::training::DivergedRun;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A readout system that is singular or too badly conditioned to trust.
    #[error("degenerate spec: {0}")]
    Degenerate(String),

    #[error("neuron class {0} is empty for pair ({1}, {2})")]
    EmptyClass(NeuronClass, usize, usize),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("training diverged at epoch {}, batch {}", .0.epoch, .0.batch)]
    Diverged(Box<DivergedRun>),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
