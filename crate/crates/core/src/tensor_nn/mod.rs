//! A small dense neural-network engine: channels-last tensors, the layer
//! vocabulary used by the spectrum / reflection / hybrid models,
//! per-sample forward and backward passes, Adam, class-weighted
//! cross-entropy, and exact parameter / MAC accounting.
//!
//! Models are generic over the float type: training runs in `f32`,
//! gradient checks in `f64`.

mod adam;
pub mod checkpoint;
mod layers;
mod loss;
mod model;
mod train;

pub use adam::{adam_step, AdamParams, AdamState};
pub use layers::{LayerSpec, Padding, Shape};
pub use loss::{class_weights, loss_weighted_ce, loss_weighted_ce_grad, softmax};
pub use model::{Architecture, Grads, Layer, ModelGraph, Trace};
pub use train::{evaluate_predictions, train, EpochRecord, Example, TrainConfig, TrainOutcome};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

/// Floating-point element type of a model.
pub trait Scalar:
    num_traits::Float
    + num_traits::NumAssign
    + std::iter::Sum
    + Default
    + Send
    + Sync
    + std::fmt::Debug
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}
