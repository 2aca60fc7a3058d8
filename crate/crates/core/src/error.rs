use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("degenerate image: {0}")]
    DegenerateImage(String),

    #[error("position constraints unsatisfiable after {attempts} attempts")]
    ConstraintUnsatisfiable { attempts: usize },

    #[error("largest eigenvalue {0} is not positive; no superradiant instability")]
    NonPositiveEigenvalue(f64),

    #[error("eigenvalue {index} is negative beyond tolerance: {value}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("quadrature did not converge for {count} entries")]
    QuadratureNonConvergence { count: usize },

    #[error("integrator step failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("grid coverage: {0}")]
    GridCoverage(String),

    #[error("binning mismatch: {0}")]
    BinningMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("replica {index}: {source}")]
    Replica {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
