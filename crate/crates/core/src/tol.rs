//! Numerical tolerances shared across the crate.

/// Maximum `|h[i,j] - conj(h[j,i])|` accepted as Hermitian.
pub const HERMITIAN: f64 = 1e-12;

/// Allowed deviation of a density matrix trace from 1.
pub const TRACE: f64 = 1e-12;

/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD: f64 = -1e-10;

/// Norm deviation accepted for pure-state amplitudes and Gisin shape parameters.
pub const NORM: f64 = 1e-12;

/// Margin a witness must clear before a state is flagged as inseparable.
pub const DETECTION: f64 = 1e-10;

/// Jacobi stops once the off-diagonal Frobenius norm is below this fraction of the total.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-14;

/// Sweep budget for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Largest composite dimension any operation in the crate will build.
pub const DIMENSION_CAP: usize = 64;
