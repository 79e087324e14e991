//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("matrix is not Hermitian: asymmetry {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is not unitary: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("non-demolition condition violated: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Nondemolition { residual: f64, tol: f64 },
    #[error(
        "interaction has no block structure over the accessor eigenbasis: \
         residual {residual:.3e} exceeds tolerance {tol:.3e}"
    )]
    BlockInconsistency { residual: f64, tol: f64 },
    #[error("index {index} out of range in {context} (dimension {dim})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        dim: usize,
    },
    #[error("durations must be non-negative, got {value}")]
    NegativeDuration { value: f64 },
    #[error("state norm {norm} is not 1 within tolerance")]
    NotNormalized { norm: f64 },
    #[error("at least one sample point per cycle is required")]
    NoSamplePoints,
    #[error("at least one generator is required")]
    EmptyGenerators,
    #[error("plant does not have the expected structure: {reason}")]
    UnsupportedPlant { reason: &'static str },
    #[error("no transverse drive: the interaction coupling vanishes, only the poles are reachable")]
    NoTransverseDrive,
}
