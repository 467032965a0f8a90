use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("{routine} did not converge after {iterations} sweeps")]
    ConvergenceFailure {
        routine: &'static str,
        iterations: usize,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("label {label} out of range for subsystem {subsystem} of dimension {dim} (byte {offset})")]
    LabelOutOfRange {
        label: usize,
        subsystem: usize,
        dim: usize,
        offset: usize,
    },

    #[error("state has zero norm")]
    EmptyState,

    #[error("invalid subsystem index {0}")]
    InvalidSubsystem(usize),

    #[error("marginal {side} has rank {rank} < {dim}")]
    RankDeficient {
        side: char,
        rank: usize,
        dim: usize,
    },

    #[error("normal form did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
