pub mod cli;
pub mod criteria;
pub mod error;
pub mod fock;
pub mod kernel;
pub mod nongaussian;
pub mod quadrature;
pub mod series;
pub mod symplectic;
pub mod witness;

pub use error::{Error, Result};
pub use symplectic::{CovarianceMatrix, ModePartition, StandardForm};
