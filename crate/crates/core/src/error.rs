use std::path::PathBuf;

use crate::calendar::Month;
use crate::netinfo::LinkMIResult;

/// Which of two compared graphs a degenerate condition refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSide {
    First,
    Second,
}

impl std::fmt::Display for GraphSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphSide::First => f.write_str("first"),
            GraphSide::Second => f.write_str("second"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-monotone dates: {previous} followed by {next}")]
    NonMonotoneDates {
        previous: chrono::NaiveDate,
        next: chrono::NaiveDate,
    },
    #[error("missing value for series {label} on {date} with no prior value")]
    MissingValue {
        label: String,
        date: chrono::NaiveDate,
    },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("non-positive price {value} for series {label} on {date}")]
    NonPositivePrice {
        label: String,
        date: chrono::NaiveDate,
        value: f64,
    },
    #[error("insufficient history: window for {end_month} with dt={delta_t_years} starts {start}, data starts {first_month}")]
    InsufficientHistory {
        end_month: Month,
        delta_t_years: f64,
        start: Month,
        first_month: Month,
    },
    #[error("window for {end_month} with dt={delta_t_years} contains {records} records")]
    TooFewRecords {
        end_month: Month,
        delta_t_years: f64,
        records: usize,
    },
    #[error("zero-variance series {label}")]
    ZeroVariance { label: String },
    #[error("invalid evaluation period {0}: must be a positive whole number of months")]
    InvalidDeltaT(f64),
    #[error("need at least {needed} series, found {found}")]
    TooFewSeries { needed: usize, found: usize },
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),
    #[error("label sets differ")]
    LabelMismatch,
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("zero entropy in {side} graph (raw mutual information {} nats)", .result.mutual_information)]
    ZeroEntropy {
        side: GraphSide,
        result: Box<LinkMIResult>,
    },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("total edge weight must be positive")]
    NonPositiveWeight,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("sample too small: n1={n1}, n2={n2} (need at least 2 each)")]
    SampleTooSmall { n1: usize, n2: usize },
    #[error("zero variance in both samples")]
    ZeroVarianceBoth,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{month}: {source}")]
    AtMonth {
        month: Month,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_month(self, month: Month) -> Self {
        Error::AtMonth {
            month,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
