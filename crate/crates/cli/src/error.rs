use thiserror::Error;

use crate::syntax::{ParseError, Pos};

/// Errors surfaced by the command line. Parse and usage errors exit with
/// status 2, everything else with status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{}", fmt_domain(.pos, .message))]
    Domain { pos: Option<Pos>, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_domain(pos: &Option<Pos>, message: &str) -> String {
    match pos {
        Some(p) => format!("error at {p}: {message}"),
        None => format!("error: {message}"),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Domain { .. } | CliError::Io(_) => 1,
        }
    }

    pub fn domain(message: impl std::fmt::Display) -> Self {
        CliError::Domain {
            pos: None,
            message: message.to_string(),
        }
    }
}
