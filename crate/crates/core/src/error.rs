use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("coupling error: lambda = {lambda} must be below sqrt(V1*V2) = {bound} (assumption (V) needs delta < 1)")]
    Coupling { lambda: f64, bound: f64 },
    #[error("grid mismatch: fields live on different grids")]
    GridMismatch,
    #[error("allocation error: padded grid needs {needed} bytes, cap is {cap} bytes")]
    Allocation { needed: usize, cap: usize },
    #[error("no nonlocal mass: fiber map has no interior maximum")]
    NoNonlocalMass,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("overflow while bracketing the fiber maximum")]
    Overflow,
    #[error("support error: {0}")]
    Support(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
