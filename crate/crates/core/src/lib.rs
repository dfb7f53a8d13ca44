//! Sign stable random projections.
//!
//! Vectors are projected onto `k` i.i.d. α-stable directions and only the
//! signs are kept. For nonnegative data the probability that two sign bits
//! disagree is governed by the χ² similarity when α = 1, and bounded by
//! `(1/π)·acos(ρ_α)` in general. The crate covers sampling, sketching
//! (batch and streaming), the analytic collision machinery, kernel export,
//! and the synthetic-data simulation used to compare them.

pub mod collision;
pub mod error;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod similarity;
pub mod simulate;
pub mod sketch;
pub mod stable;
pub mod stats;
pub mod vector;
pub mod verify;

pub use error::{Error, Result};
pub use par::{with_threads, Execution};
pub use rng::SeededRng;
pub use similarity::BinaryProfile;
pub use sketch::{SignSketch, SketchConfig, StreamSketchState};
pub use stable::{StableParams, StableSampler};
pub use stats::MonteCarloEstimate;
pub use vector::{LabeledVector, SparseVector};
