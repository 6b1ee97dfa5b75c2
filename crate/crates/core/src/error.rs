use std::fmt;

use thiserror::Error;

use crate::game::ValidationReport;

/// A parse failure with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid game:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("objective not observable: {0}")]
    NotObservable(String),
    #[error("invalid play: {0}")]
    InvalidPlay(String),
    #[error("malformed knowledge state: {0}")]
    MalformedState(String),
    #[error("inconsistent knowledge state: {0}")]
    Inconsistent(String),
    #[error("knowledge state cannot be factored: {0}")]
    FactoringViolated(String),
    #[error("expected {expected} parts, got {found}")]
    PartCountMismatch { expected: usize, found: usize },
    #[error("strategy undefined: {0}")]
    StrategyUndefined(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at {0}")]
    Parse(ParseError),
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
