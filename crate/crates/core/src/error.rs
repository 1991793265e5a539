use thiserror::Error;

use crate::eigensolver::SolverTrace;
use crate::extreme::AnnulusTrace;

/// Audit log attached to a failed search.
#[derive(Debug, Clone, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SearchTrace {
    Grid(SolverTrace),
    Annulus(AnnulusTrace),
}

impl From<SolverTrace> for SearchTrace {
    fn from(t: SolverTrace) -> Self {
        SearchTrace::Grid(t)
    }
}

impl From<AnnulusTrace> for SearchTrace {
    fn from(t: AnnulusTrace) -> Self {
        SearchTrace::Annulus(t)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// No sample passed the threshold at `level`; the supplied (kappa, m)
    /// bounds are too small for this matrix.
    #[error("bound violation at level {level}: {reason}")]
    BoundViolation {
        level: usize,
        reason: String,
        trace: Box<SearchTrace>,
    },

    /// A noisy search lost its target, which the failure budget allows
    /// with probability at most p_fail.
    #[error("probabilistic failure at level {level}: {reason}")]
    ProbabilisticFailure {
        level: usize,
        reason: String,
        trace: Box<SearchTrace>,
    },

    #[error("approximation failure: {0}")]
    Approximation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCategory {
    Input,
    BoundViolation,
    ProbabilisticFailure,
    Approximation,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Input => 2,
            ErrorCategory::BoundViolation => 3,
            ErrorCategory::ProbabilisticFailure => 4,
            ErrorCategory::Approximation => 5,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::BoundViolation { .. } => ErrorCategory::BoundViolation,
            Error::ProbabilisticFailure { .. } => ErrorCategory::ProbabilisticFailure,
            Error::Approximation(_) => ErrorCategory::Approximation,
            _ => ErrorCategory::Input,
        }
    }

    pub fn trace(&self) -> Option<&SearchTrace> {
        match self {
            Error::BoundViolation { trace, .. } | Error::ProbabilisticFailure { trace, .. } => {
                Some(trace)
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
