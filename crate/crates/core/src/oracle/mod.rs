//! Independent checks: a constructive separability search and a closed-form
//! eigenvalue route for small matrices.

mod charpoly;
mod nnls;
mod search;

pub use charpoly::{characteristic_polynomial, charpoly_eigenvalues};
pub use search::{search, search_decomposition, SearchConfig, SearchOutcome, SEARCH_DIMENSION_CAP};
