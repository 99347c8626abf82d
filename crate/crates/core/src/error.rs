use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("face {face} is numerically degenerate (an angle is within 1e-12 of 0 or pi)")]
    DegenerateTriangle { face: usize },
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("eigensolver did not converge after {iterations} restarts (worst residual {worst:.3e})")]
    NonConvergence {
        iterations: usize,
        worst: f64,
        residuals: Vec<f64>,
    },
    #[error("eigenvalue count {count} too small to certify the gap after a cluster of size {cluster}")]
    CountTooSmall { count: usize, cluster: usize },
    #[error("geometry: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
