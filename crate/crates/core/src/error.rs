use thiserror::Error;

/// Errors raised by matrix construction, state validation, and the criteria.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max |h - h^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("parameter {name} = {value} is outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("dimension cap exceeded: {dim} > {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),

    #[error("no sign change on [0, 1]: {note}")]
    NoSignChange { note: String },

    #[error("state file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
