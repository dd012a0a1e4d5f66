//! Instance files, generators, ground-truth oracles, artifact files and the
//! command line.

pub mod cli;
pub mod generate;
pub mod instance;
pub mod oracle;
pub mod persist;
