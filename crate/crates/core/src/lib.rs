//! Entanglement detection for bipartite density matrices.
//!
//! The central test is the partial transpose: if transposing the first
//! subsystem's indices of `ρ` produces a matrix with a negative eigenvalue,
//! `ρ` cannot be written as a mixture of product states. The crate also
//! carries the Horodecki CHSH test and the Rényi-2 purity test for
//! comparison, the state families they are usually compared on, a
//! randomized separable-decomposition search, and threshold scans.

pub mod criteria;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod statefile;
pub mod states;
pub mod sweep;
pub mod tol;

pub use criteria::{Criterion, CriterionReport};
pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{ComplexMatrix, Subsystem};
pub use states::{BipartiteDensityMatrix, Decomposition, Family, FamilySpec};

pub use num_complex::Complex64;
