//! Command-line front end for the `uavcov` library: scenario files, the
//! `analyze`, `simulate`, `validate` and `sweep` commands, and their artifacts.

pub mod analyze;
pub mod error;
pub mod output;
pub mod scenario;
pub mod simulate;
pub mod sweep;
pub mod validate;

pub use error::{CliError, Result};
pub use scenario::{Overrides, Scenario};
