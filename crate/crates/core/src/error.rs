use thiserror::Error;

use crate::expr::{EvalError, ParseError};

/// Every failure the numerical pipeline can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series did not converge within {max_terms} terms per index ({what})")]
    NonConvergence { what: &'static str, max_terms: usize },

    #[error("series argument {value} exceeds the magnitude cap {cap} ({what})")]
    ArgumentOutOfRange { what: &'static str, value: f64, cap: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("nonlocal condition is degenerate: |A| = {a:e} is not above {tol:e}")]
    DegenerateNonlocal { a: f64, tol: f64 },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("singular Nyström step at node {index}: pivot {pivot:e}")]
    SingularStep { index: usize, pivot: f64 },

    #[error("fixed-point iteration did not settle after {iterations} iterations (last change {last_change:e})")]
    MaxIterExceeded { iterations: usize, last_change: f64 },

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
