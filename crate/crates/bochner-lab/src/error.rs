use thiserror::Error;

/// Errors surfaced by the geometry and verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("division by a jet with zero value")]
    SingularDenominator,

    #[error("singular argument to {op}: value {value}")]
    SingularArgument { op: &'static str, value: f64 },

    #[error("metric not positive definite: leading minor {index} = {minor}")]
    NotPositiveDefinite { index: usize, minor: f64 },

    #[error("degenerate slicing: comass or projected gradient {value} below 1e-8")]
    DegenerateSlicing { value: f64 },

    #[error("frame is not orthonormal: Gram deviation {deviation}")]
    FrameNotOrthonormal { deviation: f64 },

    #[error("degenerate plane for sectional curvature")]
    DegeneratePlane,

    #[error("scene generation failed after {retries} retries")]
    GenerationFailed { retries: usize },

    #[error("divergence enforcement failed: {reason}")]
    EnforcementFailed { reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("identity {identity} requires {requirement}")]
    WrongScope {
        identity: &'static str,
        requirement: String,
    },

    #[error("linear solver did not converge: residual {residual} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("level-set extraction produced a non-closed mesh at level {level}")]
    OpenMesh { level: f64 },

    #[error("invalid configuration key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
