//! Dense f64 tensor math with reverse-mode gradients.
//!
//! All training-time math runs through a [`Graph`]: a flat tape of nodes
//! where each operation records enough to push gradients back to its
//! parents. The contract for every differentiable op is that it passes the
//! central finite-difference check in [`gradcheck`] — that harness is the
//! independent oracle for the whole backward path.
//!
//! Values are stored as [`ndarray::ArrayD<f64>`]; 64-bit precision is what
//! makes the 1e-4 gradient tolerances meaningful.

pub mod adam;
pub mod gradcheck;
pub mod graph;

pub use adam::{adam_step, AdamState, Parameter};
pub use gradcheck::{finite_difference_check, max_rel_error};
pub use graph::{dropout, dropout_mask, BatchStats, Grads, Graph, Var};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("{op}: shape mismatch: {details}")]
    ShapeMismatch { op: &'static str, details: String },
    #[error("{op}: non-finite value")]
    NonFinite { op: &'static str },
    #[error("dropout rate {0} outside [0, 1)")]
    InvalidRate(f64),
    #[error("{op}: batch of {batch} too small (need at least 2)")]
    DegenerateBatch { op: &'static str, batch: usize },
    #[error("max pool: example {row} has no valid timestep")]
    AllMasked { row: usize },
    #[error("max pool: no timesteps provided")]
    EmptySteps,
    #[error("axis {axis} invalid for {ndim}-d tensor")]
    InvalidAxis { axis: usize, ndim: usize },
    #[error("class index {index} out of range for {classes} classes")]
    InvalidClassIndex { index: usize, classes: usize },
    #[error("cross entropy: row {row} sums to {sum}, not a probability row")]
    NotNormalized { row: usize, sum: f64 },
    #[error("optimizer state holds {state} tensors, got {params} parameters")]
    StateMismatch { state: usize, params: usize },
}
