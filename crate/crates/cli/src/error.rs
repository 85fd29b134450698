//! Exit-code classification.

use satstab_core::certify::CertifyError;
use satstab_core::hybrid_sim::SimError;
use satstab_core::lmi::LmiError;
use serde::Serialize;
use thiserror::Error;

use crate::problem::ProblemError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Errors raised by the commands themselves.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Infeasible,
    Validation,
    Numerical,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Infeasible => EXIT_INFEASIBLE,
            Self::Validation => EXIT_VALIDATION,
            Self::Numerical => EXIT_NUMERICAL,
            Self::Internal => EXIT_INTERNAL,
        }
    }
}

fn certify_kind(e: &CertifyError) -> ErrorKind {
    match e {
        CertifyError::NoCertificate { .. } => ErrorKind::Infeasible,
        CertifyError::Argument(_) => ErrorKind::Validation,
        CertifyError::Lmi(LmiError::Validation { .. } | LmiError::Argument(_)) => ErrorKind::Validation,
        _ => ErrorKind::Numerical,
    }
}

/// Kind of the first recognised error in the chain.
pub fn classify(err: &anyhow::Error) -> ErrorKind {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Infeasible(_) => ErrorKind::Infeasible,
                Failure::Validation(_) => ErrorKind::Validation,
                Failure::Numerical(_) => ErrorKind::Numerical,
            };
        }
        if cause.downcast_ref::<ProblemError>().is_some() {
            return ErrorKind::Validation;
        }
        if let Some(e) = cause.downcast_ref::<CertifyError>() {
            return certify_kind(e);
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return match e {
                SimError::Matrix(_) => ErrorKind::Numerical,
                _ => ErrorKind::Validation,
            };
        }
    }
    ErrorKind::Internal
}

/// Machine-readable error record printed on stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: ErrorKind,
    pub exit_code: i32,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(err: &anyhow::Error) -> Self {
        let kind = classify(err);
        Self {
            kind,
            exit_code: kind.exit_code(),
            message: format!("{err:#}"),
        }
    }
}
