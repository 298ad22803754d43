//! Experiment harness for homology-constrained path search: config
//! loading, α sweeps, hole-count scaling, brute-force cross-checks and
//! CSV/SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod svg;
