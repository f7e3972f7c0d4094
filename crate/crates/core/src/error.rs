use thiserror::Error;

use crate::validate::Finding;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid identifier `{0}` (expected [a-z_][a-z0-9_]*)")]
    InvalidIdentifier(String),
    #[error("model has {} validation error(s); first: {}", .0.len(), .0.first().map(|f| f.to_string()).unwrap_or_default())]
    Invalid(Vec<Finding>),
    #[error("algebraic cycle among auxiliaries: {0}")]
    Cycle(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("lookup `{name}`: {message}")]
    BadLookup { name: String, message: String },
}
