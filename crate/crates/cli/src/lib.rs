//! IO, configuration, reports and the `rooflens` command line on top of
//! [`rooflens_core`].

pub mod chart;
pub mod cli;
pub mod config;
pub mod datasets;
pub mod fmt;
pub mod mtx;
pub mod registry;
pub mod report;

pub use rooflens_core as models;
