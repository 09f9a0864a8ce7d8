use thiserror::Error;

use crate::outcomes::SettingPair;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or unreadable input: config files, trial logs, tables.
    #[error("config error: {0}")]
    Config(String),

    /// A well-formed request that breaks a model or engine contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("model `{model}` requires settings before sampling the source")]
    RequiresSettings { model: String },

    #[error("undefined cell: no trials with setting pair ({}, {})", .0.0, .0.1)]
    UndefinedCell(SettingPair),

    #[error("trial {0} has no revealed quadruple")]
    MissingRevealed(u64),

    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 64,
            _ => 65,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
