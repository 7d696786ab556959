use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate cell address ({country}, {year}, {variable})")]
    DuplicateCell {
        country: String,
        year: i32,
        variable: String,
    },

    #[error("duplicate row for ({country}, {year})")]
    DuplicateRow { country: String, year: i32 },

    #[error("unknown {kind} code '{code}'")]
    UnknownCode { kind: &'static str, code: String },

    #[error("non-finite value {value} at ({country}, {year}, {variable})")]
    NonFiniteValue {
        country: String,
        year: i32,
        variable: String,
        value: f64,
    },

    #[error("cannot parse '{token}' as a number (row {row}, column '{column}')")]
    ParseCell {
        row: usize,
        column: String,
        token: String,
    },

    #[error("malformed schema (line {line}): {message}")]
    Schema { line: usize, message: String },

    #[error("csv layout error: {0}")]
    CsvLayout(String),

    #[error("cross-product matrix is not positive definite (collinear predictors)")]
    Collinearity,

    #[error("insufficient data: {n_obs} observations for {q} parameters")]
    InsufficientData { n_obs: usize, q: usize },

    #[error("variable '{code}' cannot be imputed: {cause}")]
    UnimputableVariable { code: String, cause: Box<Error> },

    #[error("auxiliary variable '{0}' has missing cells")]
    IncompleteAuxiliary(String),

    #[error("variable '{0}' has no observed values")]
    AllMissing(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible amputation rate {0}")]
    InfeasibleRate(f64),

    #[error("insufficient iterations: need at least {need} retained, have {have}")]
    InsufficientIterations { need: usize, have: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
