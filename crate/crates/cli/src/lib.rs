//! Command-line and HTTP front end for `simcheck-core`.
//!
//! Exit codes of `simcheck verify`: `0` target present, `3` target absent
//! (verification rejected the query), `1` operational error.

pub mod cli;
pub mod commands;
pub mod server;

pub use commands::{run, EXIT_ABSENT, EXIT_ERROR, EXIT_PRESENT};
