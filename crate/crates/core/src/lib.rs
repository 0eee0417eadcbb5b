//! Simulation and analysis toolkit for Mach–Zehnder light-pulse atom
//! gravimeters.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod measurement;
pub mod noise;
pub mod numeric;
pub mod raman;
pub mod trajectory;
pub mod twolevel;
pub mod types;

pub use error::{Error, Result};
