use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoamError {
    #[error("zero-length vector cannot be normalized")]
    ZeroVector,
    #[error("directions are anti-collinear (dot = {dot})")]
    AntiCollinear { dot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rotation chain is not connected at element {index}")]
    IncompatibleChain { index: usize },
    #[error("weights must lie in [0, 1] and sum to 1 (sum = {sum})")]
    WeightSumInvalid { sum: f64 },
    #[error("rotation tree deeper than {max} levels")]
    LevelOverflow { max: usize },
    #[error("invalid rotation tree: {0}")]
    InvalidTree(String),
    #[error("query point coincides with the reference point")]
    AtReferencePoint,
    #[error("convergence direction coincides with the reference direction")]
    DegenerateSaddle,
    #[error("query point coincides with the attractor")]
    AtAttractor,
    #[error("point lies on the folding singularity (p = {p})")]
    FoldSingularity { p: f64 },
    #[error("surface propagation ray is degenerate")]
    DegenerateRay,
    #[error("position lies outside every boundary")]
    AllBoundariesViolated,
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid scenario: {}", .0.join("; "))]
    ScenarioInvalid(Vec<String>),
}

pub type Result<T> = std::result::Result<T, RoamError>;
