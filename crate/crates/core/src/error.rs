use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency modules differ: rates {left:?} vs {right:?}")]
    ModuleMismatch { left: Vec<f64>, right: Vec<f64> },

    #[error("expected a rank-{expected} frequency module, found rank {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("point has dimension {found} but the module has rank {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid of {grid} points per axis is too coarse; need at least {required}")]
    GridTooSmall { grid: usize, required: usize },

    #[error("window of size {size} is too small for an exact block; need at least {required}")]
    WindowTooSmall { size: usize, required: usize },

    #[error("matrix is singular to working precision (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },

    #[error("matrix exponential overflows (1-norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("adjoint series needs more than {cap} terms (operator norm bound {norm:e})")]
    SeriesCap { cap: usize, norm: f64 },

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
