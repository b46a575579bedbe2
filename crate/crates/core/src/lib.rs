//! Genetically encoded Markov Brains.
//!
//! A [`genome::Genome`] decodes into a [`brain::Brain`]: a buffer of nodes
//! updated synchronously by a set of gates. Brains are evolved on
//! [`tasks`] by [`evolution`] and inspected with [`analysis`].
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, or `f32` with the suffix.

pub mod analysis;
pub mod brain;
pub mod decoder;
pub mod error;
pub mod evolution;
pub mod gates;
pub mod genome;
pub mod rng;
pub mod scalar;
pub mod tasks;

pub use error::{Error, Result};
pub use genome::Genome;
pub use scalar::Scalar;

pub type Brain = brain::Brain<f64>;
pub type BrainF32 = brain::Brain<f32>;
pub type GateBlueprint = gates::GateBlueprint<f64>;
pub type GateBlueprintF32 = gates::GateBlueprint<f32>;
pub type ProbabilityTable = gates::ProbabilityTable<f64>;
pub type ProbabilityTableF32 = gates::ProbabilityTable<f32>;
