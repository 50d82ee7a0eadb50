// SPDX-License-Identifier: MIT OR Apache-2.0

//! # uand
//!
//! Toy models for the Universal-AND problem: a one-hidden-layer ReLU network
//! `y = ReLU(Wv + b)`, `z = Ry + c` that must expose every pairwise AND of
//! `m` sparse boolean inputs through a linear readout while only having `d`
//! neurons.
//!
//! The crate is organised around the experiments one runs on that model:
//!
//! - [`model`] / [`loss`]: the network, the AND target and the
//!   case-balanced loss.
//! - [`datagen`]: exactly-`s`-sparse input batches from counter-based
//!   RNG streams.
//! - [`training`]: hand-written backprop, Adam/SGD with decoupled weight
//!   decay, and the frozen compute layer variant.
//! - [`constructions`]: the binary weighted circuit, the sparse 0/1
//!   construction, frozen random layers, and the class truth-table readout
//!   solver.
//! - [`analysis`]: binarity score, readout scatter charts, class tables,
//!   interference statistics, closed-form variance models and solution-type
//!   detection.
//!
//! Everything is deterministic given a [`ProblemConfig`] seed.

#![deny(unsafe_code)]

pub mod analysis;
pub mod config;
pub mod constructions;
pub mod datagen;
pub mod error;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod rng;
pub mod svg;
pub mod training;

pub use config::ProblemConfig;
pub use error::{Error, Result};
pub use loss::{compute_loss_weights, weighted_loss, Case, LossWeights};
pub use model::{ComputeLayer, Model, ModelMetadata, ModelOrigin, ReadoutLayer};
