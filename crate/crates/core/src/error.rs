use thiserror::Error;

/// Errors raised by the workbench. Logical outcomes (a failed bisimulation
/// check, an invalid proof line) are data, not errors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model JSON error at `{path}`: {message}")]
    Json { path: String, message: String },

    #[error("unknown world `{0}`")]
    UnknownWorld(String),

    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("empty relation")]
    EmptyRelation,

    #[error("resource budget of {budget} steps exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("unassigned free variable `{0}`")]
    UnassignedVariable(String),

    #[error("relation atom has {found} arguments, model expects {expected}")]
    RelationArity { expected: usize, found: usize },

    #[error("invalid TPTP identifier `{0}`")]
    InvalidIdentifier(String),

    #[error("incomplete substitution: missing `{0}`")]
    IncompleteSubstitution(String),

    #[error("too many propositional atoms ({found}, limit {limit})")]
    TooManyAtoms { found: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("proof script error: {0}")]
    Script(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
