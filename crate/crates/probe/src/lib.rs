//! File formats, reports and the command-line front end for
//! `feature-probe-core`.
//!
//! Feature tensors are read from FTEN files listed in per-image JSON
//! manifests. Reports, plans and sweep results are written as JSON.

pub mod assess;
pub mod cli;
pub mod commands;
pub mod error;
pub mod ften;
pub mod manifest;
pub mod pgm;
pub mod report;
pub mod sweep;

pub use error::{ProbeError, Result};
