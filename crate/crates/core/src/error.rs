use thiserror::Error;

use crate::model::YearMonth;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFinite { column: String, row: usize },

    #[error("column lengths differ: {detail}")]
    LengthMismatch { detail: String },

    #[error("series too short: {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("dates not strictly increasing at row {row} ({prev} then {next})")]
    NonMonotoneDates { row: usize, prev: YearMonth, next: YearMonth },

    #[error("missing month(s) between {prev} and {next}")]
    MissingMonth { prev: YearMonth, next: YearMonth },

    #[error("duplicate month {0}")]
    DuplicateMonth(YearMonth),

    #[error("dates are misaligned: {0}")]
    MisalignedDates(String),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("near-singular covariance at t = {t}{} (determinant {det:e})", state_suffix(*.state))]
    NearSingular { t: usize, state: Option<usize>, det: f64 },

    #[error("degenerate likelihood at t = {t}: both weighted densities are zero")]
    DegenerateLikelihood { t: usize },

    #[error("degenerate smoother at t = {t}: zero ex-ante probability in a needed denominator")]
    DegenerateSmoother { t: usize },

    #[error("no unique stationary distribution (p = q = 1)")]
    NoStationaryDistribution,

    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter vector: {0}")]
    InvalidParameters(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("singular information matrix; near-zero eigenvalues: {eigenvalues:?}")]
    SingularInformation { eigenvalues: Vec<f64> },

    #[error("degenerate series: zero variance")]
    DegenerateSeries,

    #[error("nonpositive or non-finite yield {value} at index {index}")]
    InvalidYield { index: usize, value: f64 },

    #[error("degenerate dummy: indicator is {0} for every observation")]
    DegenerateDummy(u8),

    #[error("empty table")]
    EmptyTable,

    #[error("empty input")]
    EmptyInput,

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse { row: usize, column: String, message: String },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn state_suffix(state: Option<usize>) -> String {
    match state {
        Some(s) => format!(", state {s}"),
        None => String::new(),
    }
}
