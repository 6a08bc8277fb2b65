use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("non-positive value {value} at row {row}, column {col}")]
    NonPositive { row: usize, col: usize, value: f64 },

    #[error("cannot parse {text:?} as a number at row {row}, column {col}")]
    Parse {
        row: usize,
        col: usize,
        text: String,
    },

    #[error("need at least {min} rows, got {n}")]
    TooFewRows { n: usize, min: usize },

    #[error("need at least 2 columns, got {0}")]
    TooFewColumns(usize),

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not positive definite: leading minor {minor} is not positive")]
    NotPositiveDefinite { minor: usize },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),

    #[error("coordinate {0} is not covered by any component")]
    UncoveredCoordinate(usize),

    #[error("invalid mass distribution: {0}")]
    InvalidMass(String),

    #[error("no closed form for {0}")]
    NoClosedForm(String),

    #[error("no observations above threshold {threshold}")]
    NoExceedances { threshold: f64 },

    #[error("level {level} is below the fitted threshold {threshold}")]
    BelowThreshold { level: f64, threshold: f64 },

    #[error("missing tau value for superset cone {0}")]
    MissingSuperset(String),

    #[error("no region could be fitted")]
    EmptyModel,

    #[error("every cone has mass below pi = {pi}")]
    AllMassNegligible { pi: f64 },

    #[error("{stage} failed in replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Model,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::EmptyModel | Error::AllMassNegligible { .. } => ErrorKind::Model,
            Error::Replicate { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
