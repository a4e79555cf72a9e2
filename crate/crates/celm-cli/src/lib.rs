//! Benchmark harness library: metrics, reports, and the subcommand
//! implementations behind the `celm` binary.

pub mod commands;
pub mod jsonfmt;
pub mod metrics;
pub mod report;
