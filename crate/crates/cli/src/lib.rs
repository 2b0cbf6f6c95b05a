//! Script language and command line front end for `katofan-core`.

pub mod commands;
pub mod emit;
pub mod error;
pub mod syntax;
pub mod workspace;

pub use commands::{execute, Command, Format, Options, Output};
pub use error::CliError;
