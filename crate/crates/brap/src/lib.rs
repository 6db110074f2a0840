//! File formats, benchmark runner and reporting for `brap-core`.

pub mod formats;
pub mod manifest;
pub mod report;
pub mod runner;
