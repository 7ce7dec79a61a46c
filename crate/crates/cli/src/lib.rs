//! Experiment driver library behind the `dabsor` binary: configuration,
//! single-run orchestration, table reproduction and surface sweeps.

pub mod config;
pub mod experiment;
pub mod surface;
pub mod tables;
