//! Curiosity-driven sequential classification.
//!
//! The crate has two halves. The `arousal` module is a small, generic
//! curiosity-arousal toolkit: the Wundt curve, Shannon entropy, and an
//! attention-spread formula, usable independently of any classifier. The
//! remaining modules implement an evolving single-hidden-layer RBF
//! classifier whose structure and parameters are driven by four collative
//! variables (novelty, uncertainty, conflict, surprise) appraised per
//! training sample: `network` holds the model state and forward pass,
//! `solver` the least-squares and recursive-least-squares kernels,
//! `curiosity` the appraisal and strategy selection, `celm` the sequential
//! training loop, and `data` dataset ingestion, coding, normalization and
//! splitting.

pub mod arousal;
pub mod celm;
pub mod curiosity;
pub mod data;
pub mod error;
pub mod network;
pub mod solver;

pub use error::{Error, Result};
