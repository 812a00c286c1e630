//! Batch front end: group specs in, JSON run reports out.

pub mod commands;
pub mod error;
pub mod pretty;
pub mod report;
pub mod spec;

pub use commands::{cmd_pairing, cmd_products, cmd_tate, cmd_validate, RunOptions, TateSeries};
pub use error::CliError;
pub use pretty::render;
pub use report::{Check, RunReport, Timing};
pub use spec::{Coefficients, ResolvedSpec, SpecFile, SPEC_SCHEMA};
