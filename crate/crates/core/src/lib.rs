//! Source-level mutation testing for Java.
//!
//! The pipeline has two phases. `mutate` parses every source file and writes
//! first-order (and optionally second-order) mutants to disk; `run` verifies
//! the test suite is green, swaps each mutant into the workspace, runs an
//! arbitrary build command and classifies the outcome. Results feed the
//! coverage report, sampling experiments and dynamic subsumption analysis.

pub mod config;
pub mod error;
pub mod executor;
pub mod higher_order;
pub mod java;
pub mod manual_import;
pub mod mutation;
pub mod project;
pub mod report;
pub mod results;
pub mod sampler;
pub mod subsumption;

pub use error::{Error, Result};
