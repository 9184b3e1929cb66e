//! File formats, batch execution and the command line for `tndp-core`.

pub mod analyze;
pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod io;
pub mod lint;
pub mod problem;

pub use error::{Error, Result};
