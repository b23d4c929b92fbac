use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("system size N={n} exceeds the enumeration limit of {max}")]
    Capacity { n: usize, max: usize },

    #[error("spin configuration has length {got}, model expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bracket [{lo}, {hi}] does not straddle a phase boundary (both ends: {label})")]
    Bracket { lo: f64, hi: f64, label: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver did not converge at {context}")]
    NotConverged { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
