//! File formats, parallel execution and the `assoc-bias` command line on
//! top of `assocbias-core`.

pub mod commands;
pub mod corpus;
mod error;
pub mod parallel;
pub mod render;
pub mod specfile;
pub mod templatefile;
pub mod vectors;

pub use assocbias_core as core;
pub use error::{Error, Result};
