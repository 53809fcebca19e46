use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("transform on attribute `{attribute}`: {reason}")]
    Transform { attribute: String, reason: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("tuple `{id}` does not conform to schema: {reason}")]
    SchemaMismatch { id: String, reason: String },

    #[error("unknown tuple id `{0}`")]
    UnknownTuple(String),

    #[error("weight polytope is empty")]
    InfeasibleFamily,

    #[error("vertex enumeration supports at most {max} weights, got {got}")]
    UnsupportedDimension { got: usize, max: usize },

    #[error("malformed linear program: {0}")]
    LpStructure(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
