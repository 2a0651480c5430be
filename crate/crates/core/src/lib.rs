//! Free-probability extreme-value theory on distribution functions, with a
//! finite-dimensional matrix laboratory for the operator-level statements.

pub mod attraction;
pub mod cdf;
pub mod error;
pub mod laws;
pub mod numeric;
pub mod poisson;
pub mod spectral;

pub use cdf::{Cdf, CdfKind, Distribution};
pub use error::{Error, Result};
