//! Command-line front end: argument parsing, commands and output records.

pub mod args;
pub mod commands;
pub mod record;

pub use record::OutputRecord;
