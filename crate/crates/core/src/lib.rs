//! Multi-class link prediction on typed interaction graphs.
//!
//! The typed adjacency matrix of an interaction graph is factorized by a small
//! network whose embedding table and per-node bias are shared between the two
//! endpoints of a pair, so every prediction is exactly symmetric. Training
//! targets can be softened by blending each hard label with the class
//! distribution of the pair's incident edges (the propagation factor), and the
//! loss can be class-balanced.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the CLI live
//! in the `amfpmc` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod phrase;
pub mod pipeline;
pub mod propagation;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{ClassId, DrugIdx, EvalMode, Roster, TypedInteractionGraph};
pub use model::{Hyperparameters, ModelParameters};
