//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cannot parse cell at row {row}, column {col}: {value:?}")]
    Parse { row: usize, col: usize, value: String },

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    Shape {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "{count} zero k-NN radii from exactly tied points; rank with TiePolicy::random to jitter ties apart"
    )]
    DegenerateDistances { count: usize },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("series too short: need at least {required} observations, got {got}")]
    SeriesTooShort { required: usize, got: usize },

    #[error("copula model error: {0}")]
    Model(String),

    #[error("copula density is undefined outside the open unit cube (offending point {0:?})")]
    Domain(Vec<f64>),

    #[error("copula density vanished at sample row {row}; log-likelihood is -inf")]
    ZeroDensity { row: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("while estimating pair ({i}, {j}): {source}")]
    PairEstimate {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}
