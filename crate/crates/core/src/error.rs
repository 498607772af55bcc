//! Crate-wide error type.

/// Errors produced by state construction, channel algebra, and sweep drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("Fock dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("channel is not completely positive (min Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("truncation tail population {tail:.3e} exceeds limit {limit:.3e}; increase the Fock dimension")]
    Truncation { tail: f64, limit: f64 },
    #[error("primitive state has no support on one of the codeword lattices")]
    DegeneratePrimitive,
    #[error("exponential integral E1 is undefined at z = 0")]
    ExpIntegralAtZero,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("revival sum not converged at horizon: accumulated {accumulated:.6e}, tail bound {tail_bound:.3e}")]
    NotConverged { accumulated: f64, tail_bound: f64 },
    #[error("Wigner grid too small: |W| = {0:.3e} on the boundary")]
    GridTooSmall(f64),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
