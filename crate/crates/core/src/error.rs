use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("label tokens must be non-empty")]
    EmptyLabel,
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("unknown metric `{0}` (expected precision, recall or f1)")]
    UnknownMetric(String),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed reconstruction spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate example id `{id}` (rows {first} and {second})")]
    DuplicateId { id: String, first: usize, second: usize },
    #[error("duplicate team column `{0}`")]
    DuplicateTeam(String),
    #[error("empty cell at row {row}, column `{column}`")]
    EmptyCell { row: usize, column: String },
    #[error("token `{token}` in column `{column}` contains a delimiter or line break")]
    InvalidToken { column: String, token: String },
    #[error("positive label `{0}` never occurs in the gold column")]
    UnknownPositiveLabel(String),
    #[error("row {row} has {found} fields, expected {expected}")]
    LengthMismatch { row: usize, expected: usize, found: usize },
    #[error("dataset has no examples")]
    Empty,
    #[error("team `{team}`: {field}={value} outside [0, {max}]")]
    CountOutOfRange {
        team: String,
        field: &'static str,
        value: u64,
        max: u64,
    },
    #[error(transparent)]
    Label(#[from] MetricsError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ResampleError {
    #[error("unknown team `{0}`")]
    UnknownTeam(String),
    #[error("distributions come from different resample plans")]
    PlanMismatch,
    #[error("distributions are for different metrics")]
    MetricMismatch,
    #[error("plan is for n={plan} but dataset has n={dataset}")]
    SizeMismatch { plan: usize, dataset: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("at least two teams are required, found {0}")]
    TooFewTeams(usize),
    #[error("observed difference {0} is negative; orient the pair so the better team comes first")]
    NegativeDelta(f64),
    #[error("confidence level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),
    #[error("score distribution is empty")]
    EmptyDistribution,
    #[error("no metrics selected")]
    NoMetrics,
    #[error(transparent)]
    Resample(#[from] ResampleError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

impl ReportError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ReportError::Io {
            path: path.into(),
            source,
        }
    }
}
