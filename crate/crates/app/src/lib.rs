//! Command line and HTTP/JSON front ends for `icepm` models.

pub mod bundle;
pub mod cli;
pub mod config;
pub mod error;
pub mod ops;
pub mod pipeline;
pub mod server;

pub use bundle::{ModelBundle, Provenance};
pub use error::{AppError, ErrorKind};
