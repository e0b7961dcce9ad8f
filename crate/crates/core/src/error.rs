use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("duplicate year {year} at row {row}")]
    DuplicateYear { row: usize, year: i32 },

    #[error("unknown table '{0}'")]
    UnknownTable(String),

    #[error("table {table} has no field '{field}'")]
    UnknownField { table: String, field: String },

    #[error("table {table} cannot be converted to an annual series: {reason}")]
    NotASeries { table: String, reason: String },

    #[error("invalid series '{name}': {reason}")]
    InvalidSeries { name: String, reason: String },

    #[error("series too short: {len} values, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("year ranges differ: {left} vs {right}")]
    YearRangeMismatch { left: String, right: String },

    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: String, found: String },

    #[error("predictor '{0}' is constant; slope is undefined")]
    DegeneratePredictor(String),

    #[error("series '{0}' is constant; normalization range is zero")]
    ZeroRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("all {restarts} training restarts diverged")]
    AllRestartsDiverged { restarts: usize },

    #[error("non-finite prediction at forecast step {step} (year {year})")]
    NonFinitePrediction { step: usize, year: i32 },

    #[error("year {0} is not present in the series")]
    MissingYear(i32),

    #[error("value {value} for year {year} must be positive")]
    NonPositive { year: i32, value: f64 },

    #[error("no data for year {0}: the source tables omit it")]
    DataGap(i32),

    #[error("no row labelled '{0}'")]
    MissingTotalRow(String),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("figure '{0}' is not supported: {1}")]
    UnsupportedFigure(String, String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that come from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AllRestartsDiverged { .. } | Error::NonFinitePrediction { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
