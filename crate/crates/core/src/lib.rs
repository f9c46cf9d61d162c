//! Block-encoding and QSVT simulator for finite-horizon LQG control.

pub mod beops;
pub mod blockenc;
pub mod classical;
pub mod error;
pub mod generate;
pub mod harness;
pub mod linalg;
pub mod problem;
pub mod qsvt;
pub mod quantum;
pub mod random;

pub use error::{Error, Result};
