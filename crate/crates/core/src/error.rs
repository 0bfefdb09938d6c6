use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} index {index} out of range 1..={bound}")]
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },

    #[error("product is not a logical matrix")]
    NotLogicalResult,

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("conflicting definition: {0}")]
    ConflictingDefinition(String),

    #[error("search space of {candidates} candidates exceeds budget {budget}")]
    SearchSpaceTooLarge { candidates: String, budget: u64 },

    #[error("disturbance can not be decoupled: substates {0:?} are unclassified")]
    Unclassifiable(Vec<usize>),

    #[error("inconsistent trace at step {step}: {message}")]
    InconsistentTrace { step: usize, message: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("network has no output matrix")]
    MissingOutput,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
