use thiserror::Error;

/// Errors raised by the engine. Mathematical failures (a map that is not
/// coarse, a sequence that is not exact) are verdicts inside reports, not errors.
#[derive(Debug, Error)]
pub enum CoarseError {
    #[error("scale {scale} exceeds the faithful scale cap {cap} of the truncation")]
    ScaleExceedsCap { scale: f64, cap: f64 },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("point index {index} out of range for a space with {len} points")]
    PointOutOfRange { index: usize, len: usize },

    #[error("maps or sets live on different spaces: {0}")]
    MismatchedSpaces(String),

    #[error("classes do not partition the points: {0}")]
    NotAPartition(String),

    #[error("invalid decomposition: {0}")]
    Decomposition(String),

    #[error("degree {degree} is outside the built range (complex capped at dimension {dim_cap})")]
    DegreeOutOfRange { degree: usize, dim_cap: usize },

    #[error("not a simplicial map: {0}")]
    NotSimplicial(String),

    #[error("map does not respect the subcomplex: {0}")]
    SubcomplexViolation(String),

    #[error("no admissible target stage: {0}")]
    NoAdmissibleStage(String),

    #[error("union hypothesis fails: {0}")]
    UnionHypothesis(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("construction invariant violated: {0}")]
    Construction(String),

    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoarseError>;
