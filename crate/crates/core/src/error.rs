use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("complex dimension m = {0} is not supported: the quadric model requires m >= 3")]
    DimensionTooSmall(usize),

    #[error("operator is not symmetric: asymmetry norm {asymmetry:.3e} exceeds {tolerance:.1e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("normal vector has zero (or non-finite) length")]
    DegenerateNormal,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("free jet part is not totally symmetric (defect {0:.3e})")]
    NotTotallySymmetric(f64),

    #[error("Codazzi system inconsistent: least-squares residual {0:.3e} exceeds 1e-8")]
    CodazziInconsistent(f64),

    #[error("operation requires a {required} normal, found {found}")]
    WrongNormalType {
        required: &'static str,
        found: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
