use std::fmt;

use icepm::design::DesignError;
use icepm::gammalasso::FitError;
use icepm::gibbs::GibbsError;
use icepm::lineup::LineupError;
use icepm::simgen::SimError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unparseable command line.
    Usage,
    /// Bad flags or request body.
    InvalidQuery,
    /// Unreadable or inconsistent input files.
    InvalidInput,
    NotFound,
    Infeasible,
    Internal,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::InvalidQuery => "invalid_query",
            ErrorKind::InvalidInput => "invalid_input",
            ErrorKind::NotFound => "not_found",
            ErrorKind::Infeasible => "infeasible",
            ErrorKind::Internal => "internal",
        }
    }

    pub fn http_status(self) -> u16 {
        match self {
            ErrorKind::Usage | ErrorKind::InvalidQuery | ErrorKind::InvalidInput => 400,
            ErrorKind::NotFound => 404,
            ErrorKind::Infeasible => 409,
            ErrorKind::Internal => 500,
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage | ErrorKind::InvalidQuery => 2,
            ErrorKind::Infeasible => 3,
            ErrorKind::NotFound => 4,
            ErrorKind::InvalidInput | ErrorKind::Internal => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppError {
    pub kind: ErrorKind,
    pub error: String,
    pub detail: String,
}

/// Wire form shared by the CLI and the service.
#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub error: &'a str,
    pub code: &'a str,
    pub detail: &'a str,
}

impl AppError {
    pub fn new(kind: ErrorKind, error: impl Into<String>, detail: impl Into<String>) -> Self {
        AppError { kind, error: error.into(), detail: detail.into() }
    }

    pub fn query(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::InvalidQuery, "invalid query", detail)
    }

    pub fn input(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::InvalidInput, "invalid input", detail)
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::NotFound, "not found", detail)
    }

    pub fn body(&self) -> ErrorBody<'_> {
        ErrorBody { error: &self.error, code: self.kind.code(), detail: &self.detail }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.body()).expect("plain strings serialize")
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.error, self.detail)
    }
}

impl std::error::Error for AppError {}

impl From<LineupError> for AppError {
    fn from(e: LineupError) -> Self {
        let kind = match &e {
            LineupError::Infeasible | LineupError::InfeasibleRoster(_) => ErrorKind::Infeasible,
            LineupError::UnknownPlayer(_)
            | LineupError::OverlappingLines(_)
            | LineupError::InvalidQuery(_)
            | LineupError::InvalidLine(_) => ErrorKind::InvalidQuery,
            LineupError::Io(_) => ErrorKind::Internal,
            _ => ErrorKind::InvalidInput,
        };
        let error = if kind == ErrorKind::Infeasible { "infeasible" } else { "lineup error" };
        AppError::new(kind, error, e.to_string())
    }
}

impl From<DesignError> for AppError {
    fn from(e: DesignError) -> Self {
        let kind = match e {
            DesignError::Io(_) => ErrorKind::Internal,
            _ => ErrorKind::InvalidInput,
        };
        AppError::new(kind, "design error", e.to_string())
    }
}

impl From<FitError> for AppError {
    fn from(e: FitError) -> Self {
        let kind = match e {
            FitError::InvalidPenalty(_) | FitError::InvalidGrid(_) => ErrorKind::InvalidQuery,
            FitError::NotConverged { .. } => ErrorKind::Internal,
            _ => ErrorKind::InvalidInput,
        };
        AppError::new(kind, "fit error", e.to_string())
    }
}

impl From<GibbsError> for AppError {
    fn from(e: GibbsError) -> Self {
        let kind = match e {
            GibbsError::InvalidParameter(_) => ErrorKind::InvalidQuery,
            GibbsError::UnknownColumn(_) => ErrorKind::InvalidQuery,
            GibbsError::SolverFailure { .. } | GibbsError::Io(_) => ErrorKind::Internal,
            _ => ErrorKind::InvalidInput,
        };
        AppError::new(kind, "sampler error", e.to_string())
    }
}

impl From<SimError> for AppError {
    fn from(e: SimError) -> Self {
        AppError::new(ErrorKind::InvalidQuery, "simulation error", e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        let kind = if e.kind() == std::io::ErrorKind::NotFound { ErrorKind::NotFound } else { ErrorKind::Internal };
        AppError::new(kind, "io error", e.to_string())
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::input(e.to_string())
    }
}
