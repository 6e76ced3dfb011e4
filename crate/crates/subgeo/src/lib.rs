//! File formats, CSV reports and the command implementations behind the
//! `subgeo` binary.

pub mod commands;
pub mod report;
pub mod spec_file;

pub use commands::Suite;
pub use spec_file::{ChainSpec, SpecError};
