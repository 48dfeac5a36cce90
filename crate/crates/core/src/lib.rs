pub mod audit;
pub mod cli;
pub mod constructions;
pub mod criteria;
pub mod distances;
pub mod empirical;
pub mod error;
pub mod harness;
pub mod io;
pub mod probability;
pub mod scalar;

pub use error::{AuditError, Result};
