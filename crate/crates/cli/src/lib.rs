//! Batch commands and the session host behind the `coppertrace` binary.

pub mod pipeline;
pub mod session;

pub use pipeline::{CliError, Output, Project, Status};
pub use session::Session;

/// Current used by `report` when none is given.
pub const DEFAULT_CURRENT_MA: f64 = 100.0;
