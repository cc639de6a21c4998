use std::fmt;

/// Library error type. The CLI maps variants onto exit codes: input errors
/// exit 1, infeasible or out-of-scope constructs exit 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Syntax error with source position (1-based line and column).
    Parse { line: usize, col: usize, msg: String },
    /// Semantically invalid input (arity mismatch, unknown predicate, ...).
    Invalid(String),
    /// Construct the engine deliberately does not support.
    OutOfScope(String),
    /// Parameters outside the feasible range (domain too small, edge budget
    /// exceeded, oracle atom cap, ...).
    Infeasible(String),
    /// Zero partition function where a distribution was requested.
    Unsatisfiable(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, col, msg } => write!(f, "parse error at {line}:{col}: {msg}"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::OutOfScope(msg) => write!(f, "out of scope: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::Unsatisfiable(msg) => write!(f, "unsatisfiable theory: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
