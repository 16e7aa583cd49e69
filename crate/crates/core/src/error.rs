use thiserror::Error;

use crate::semantics::Configuration;

/// Errors raised by the semantic world, graph, learner, tutor and language layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid world: {0} blocks (at least 2 are required)")]
    InvalidWorld(usize),
    #[error("unsupported world size: {0} blocks (supported range is 2..=5)")]
    UnsupportedSize(usize),
    #[error("dimension mismatch: expected {expected} predicate bits, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("malformed configuration: {0}")]
    MalformedConfiguration(String),
    #[error("scene invariant violated: {0}")]
    InvalidScene(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("unknown node {0}")]
    UnknownNode(Configuration),
    #[error("invalid goal {0}: not a realizable configuration")]
    InvalidGoal(Configuration),
    #[error("infeasible intervention: {0}")]
    InfeasibleIntervention(String),
    #[error("inventory load error: {0}")]
    InventoryLoad(String),
    #[error("unknown sentence {0:?}")]
    UnknownSentence(String),
    #[error("inconsistent grounding data for {0:?}: no candidate transformation survives")]
    InconsistentData(String),
    #[error("sentence {0:?} is not yet grounded")]
    NotYetGrounded(String),
    #[error("no compatible goal")]
    NoCompatibleGoal,
    #[error("malformed expression: {0}")]
    MalformedExpression(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
