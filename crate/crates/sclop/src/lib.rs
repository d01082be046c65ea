//! File formats, exports and the command-line front end for `sclop-core`.

pub mod cli;
pub mod error;
pub mod exec;
pub mod export;
pub mod formats;
pub mod input;

pub use error::{CliError, Result};
