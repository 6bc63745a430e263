use thiserror::Error;

use crate::category::Violation;
use crate::functor::FunctorViolation;

/// Errors raised by the algorithmic layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid category: {}", join(.0))]
    InvalidCategory(Vec<Violation>),
    #[error("invalid functor: {}", join(.0))]
    InvalidFunctor(Vec<FunctorViolation>),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("unknown product index `{0}`")]
    IndexUnknown(String),
    #[error("component `{component}` does not belong to factor `{index}`")]
    ComponentWrongFactor { index: String, component: String },
    #[error("functor source/target mismatch: {0}")]
    SourceTargetMismatch(String),
    #[error("functor is not invertible: {0}")]
    NotInvertible(String),
    #[error("not an isomorphism: {0}")]
    NotIso(String),
    #[error("category is not connected: {0}")]
    NotConnected(String),
    #[error("category is empty")]
    EmptyCategory,
    #[error("inconsistent isomorphism seed: {0}")]
    SeedInconsistent(String),
    #[error("isomorphism search exceeded its time limit of {0:?}")]
    Timeout(std::time::Duration),
    #[error("size limit exceeded: {what} needs {needed} morphisms, limit is {limit}")]
    SizeExceeded {
        what: String,
        needed: u128,
        limit: usize,
    },
    #[error("inner products use different index sets: {0}")]
    RaggedIndexSets(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCategory(_) => "invalid_category",
            Error::InvalidFunctor(_) => "invalid_functor",
            Error::UnknownObject(_) => "unknown_object",
            Error::UnknownMorphism(_) => "unknown_morphism",
            Error::IndexUnknown(_) => "index_unknown",
            Error::ComponentWrongFactor { .. } => "component_wrong_factor",
            Error::SourceTargetMismatch(_) => "source_target_mismatch",
            Error::NotInvertible(_) => "not_invertible",
            Error::NotIso(_) => "not_iso",
            Error::NotConnected(_) => "not_connected",
            Error::EmptyCategory => "empty_category",
            Error::SeedInconsistent(_) => "seed_inconsistent",
            Error::Timeout(_) => "timeout",
            Error::SizeExceeded { .. } => "size_exceeded",
            Error::RaggedIndexSets(_) => "ragged_index_sets",
            Error::PreconditionViolated(_) => "precondition_violated",
            Error::ParamOutOfRange(_) => "param_out_of_range",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
