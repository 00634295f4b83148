//! Exact symbolic engine for homological reduction of Hamiltonian systems
//! with polynomial moment maps.

pub mod algebra;
pub mod brst;
pub mod error;
pub mod grading;
pub mod hpt;
pub mod hypotheses;
pub mod koszul;
pub mod linalg;
pub mod rational;
pub mod reduction;
pub mod sampling;
pub mod schouten;
pub mod setup;
pub mod tate;

pub use error::{Error, Result};
