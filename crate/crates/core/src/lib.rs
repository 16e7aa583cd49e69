//! Semantic simulation of teachable autotelic agents in a block-manipulation world.
//!
//! The crate is organized bottom-up:
//!
//! - [`semantics`]: blocks, close/above predicates, configurations, scenes and one-block moves.
//! - [`graph`]: the goal graph over valid configurations and its queries.
//! - [`competence`]: the saturating practice curve that stands in for skill learning.
//! - [`learner`]: the autotelic agent (goal sampling, planning, stochastic execution, hindsight
//!   discovery, internalization of tutor goals).
//! - [`tutor`]: the social partner (scheduling, frontier goals, scene setting, descriptions).
//! - [`language`]: sentence inventory, grounding to configuration sets, expression algebra and
//!   instruction following.
//!
//! Probability-valued computations are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the default precision.

pub mod competence;
pub mod error;
pub mod graph;
pub mod language;
pub mod learner;
pub mod scalar;
pub mod semantics;
pub mod tutor;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Competence model at the default precision.
pub type Competence = competence::CompetenceModel<f64>;
/// Single-precision competence model.
pub type Competence32 = competence::CompetenceModel<f32>;
