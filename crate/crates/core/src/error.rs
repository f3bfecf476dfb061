use thiserror::Error;

#[derive(Debug, Error)]
pub enum PmeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("numerical instability: {0}")]
    Instability(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("stencil degenerate near the free boundary at ({0}, {1})")]
    StencilDegenerate(f64, f64),
    #[error("ambiguous front: {0}")]
    AmbiguousFront(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PmeError>;

impl PmeError {
    /// Process exit status: 2 for bad input, 3 for failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            PmeError::Config(_) | PmeError::InvalidParameter(_) => 2,
            _ => 3,
        }
    }
}
