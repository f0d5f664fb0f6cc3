//! File formats, the bilinear form library and optimizer orchestration
//! behind the `cfft` binary.

pub mod bench;
pub mod config;
pub mod error;
pub mod formats;
pub mod forms;
pub mod optimize;
pub mod plan;
pub mod reference;

pub use error::{CliError, Result};
