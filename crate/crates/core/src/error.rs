use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a complex: d_out * d_in has entry {entry} at ({row}, {col})")]
    NotAComplex { row: usize, col: usize, entry: String },
    #[error("|i| = {requested} exceeds the chain length cap {cap}")]
    CapExceeded { requested: i64, cap: i64 },
    #[error("junction convention {0} is not preserved by the differential")]
    JunctionUnsatisfiable(String),
    #[error("word {0} is not a basis word of the chain")]
    UnknownWord(String),
    #[error("point {point} does not belong to family {family}")]
    FamilyMismatch { point: String, family: String },
    #[error("dimension mismatch between fields: {0}")]
    FieldMismatch(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("reference data: {0}")]
    Reference(String),
    #[error("radical is not nilpotent: {0}")]
    NotNilpotent(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
