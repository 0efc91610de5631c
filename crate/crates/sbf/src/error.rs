use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("zero mode: {0}")]
    ZeroMode(String),
    #[error("singular symbol: {0}")]
    SingularSymbol(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("coincident points: {0}")]
    Singularity(String),
    #[error("linear algebra failure: {msg} (residual {residual:e})")]
    LinearAlgebra { msg: String, residual: f64 },
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("stability abort: {0}")]
    Stability(String),
    #[error("self-intersection abort: {0}")]
    SelfIntersection(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
