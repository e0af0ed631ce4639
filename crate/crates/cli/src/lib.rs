//! Library half of the `merlab` command-line tool.

pub mod commands;
pub mod dsl;
pub mod error;
pub mod report;
