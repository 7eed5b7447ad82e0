//! Numerical estimation of regularity constants for finite collections of
//! closed sets in R^n and for set-valued mappings.

pub mod bundled;
pub mod checks;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mappings;
pub mod moduli;
pub mod projections;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
