//! Interchangeable machine-learning models behind a single compute/parameter
//! contract, with a reproducible data pipeline, propagation trainers,
//! derivative-free optimizers and tree-based genetic programming.

// Validation guards are written `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod gp;
pub mod models;
pub mod optim;
pub mod parallel;
pub mod pipeline;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
pub use rng::DeterministicRng;
