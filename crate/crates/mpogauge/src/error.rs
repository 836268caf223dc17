use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis label `{0}` not found")]
    LabelNotFound(String),
    #[error("extent mismatch on `{label}`: {left} vs {right}")]
    ExtentMismatch { label: String, left: usize, right: usize },
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid axis partition: {0}")]
    InvalidPartition(String),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("not a subgroup")]
    NotSubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),
    #[error("not a representation: {0}")]
    NotRepresentation(String),
    #[error("dense size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("solution not unique: null space dimension {0}")]
    NotUnique(usize),
    #[error("not proportional: residual {0:e}")]
    NotProportional(f64),
    #[error("anomalous fusion data: the 3-cocycle is not a coboundary, so no strict gauge exists")]
    Anomalous,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid category: {0}")]
    InvalidCategory(String),
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
