use thiserror::Error;

use crate::scale::ScaleFunction;

/// Errors shared across the engine.
#[derive(Error, Debug)]
pub enum Error {
    #[error("scale functions belong to different scale contexts")]
    ContextMismatch,
    #[error("unknown scale symbol `{0}`")]
    UnknownSymbol(String),
    #[error("nonpositive value assigned to scale symbol `{0}`")]
    NonPositiveAssignment(String),
    #[error("regulator limit does not exist; singular part: {0}")]
    DivergentLimit(Box<ScaleFunction>),
    #[error("contracting this edge would leave an empty vertex")]
    EmptyVertex,
    #[error("subgraph contraction undefined: {0}")]
    ContractionUndefined(String),
    #[error("invalid stable graph: {0}")]
    InvalidGraph(String),
    #[error("graph insertion data invalid: {0}")]
    InsertionInvalid(String),
    #[error("interaction has forbidden component at (i,j) = ({0},{1})")]
    InvalidInteraction(u32, u32),
    #[error("dimension or truncation mismatch between graded functionals")]
    GradedMismatch,
    #[error("counterterm at {0} depends on a length-scale symbol; this falsifies L-independence")]
    LDependenceViolation(String),
    #[error("BPHZ table missing entry for graph {0}")]
    MissingDependency(String),
    #[error("no counterterm tensor available for subgraph component {0}")]
    MissingSubgraphEntry(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
