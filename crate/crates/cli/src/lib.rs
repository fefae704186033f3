//! Library side of the `qndsim` command: config files, figure tables, manifests
//! and run comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod figures;
pub mod run;
pub mod table;

pub use error::{Category, CliError};
pub use figures::Figure;
