//! File formats, command-line front end and acceptance suite for `neutral-core`.

pub mod acceptance;
pub mod cli;
pub mod output;
pub mod sysfile;
