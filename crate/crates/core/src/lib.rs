//! Regular-vine copulas.
//!
//! The crate covers the bivariate building blocks ([`bicop`]), the lower-triangular
//! matrix encoding of a vine ([`structure`]), density evaluation and simulation
//! ([`eval`]), sequential tree-by-tree selection ([`select`]) and joint
//! maximum-likelihood refinement with Vuong comparisons ([`fit`]).
//!
//! Everything works on the copula scale: observations are expected in `(0, 1)`.

pub mod bicop;
pub mod dist;
pub mod error;
pub mod eval;
pub mod fit;
pub mod kendall;
pub mod matrix;
pub mod model;
pub mod optim;
pub mod sample;
pub mod select;
pub mod structure;

pub use error::{Error, Result};
pub use model::RVineModel;
pub use sample::CopulaSample;
