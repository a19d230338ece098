//! File formats and command-line plumbing for `amfpmc-core`.

pub mod error;
pub mod files;
pub mod model_io;
pub mod report_io;
pub mod tsv;

pub use error::{IoError, Result};
