pub mod cli;
pub mod em_constants;
pub mod error;
pub mod harness;
pub mod ie_solver;
pub mod oracles;
pub mod quadrature;
pub mod series;

pub use error::{HfpError, Result};
