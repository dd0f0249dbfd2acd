//! CLI error kind → exit code mapping: usage problems exit 2, I/O and
//! runtime failures exit 1.

use std::fmt;

#[derive(Debug)]
pub enum CmdError {
    /// Bad flags or semantically invalid inputs (exit code 2).
    Usage(String),
    /// Unreadable/unwritable files, malformed content, runtime failures
    /// (exit code 1).
    Io(String),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Usage(msg) | CmdError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CmdError {}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Io(_) => 1,
        }
    }
}

/// Sampler/model errors that indicate bad user input become usage errors;
/// everything else is a runtime failure.
impl From<glogit::Error> for CmdError {
    fn from(e: glogit::Error) -> Self {
        match &e {
            glogit::Error::InvalidData(_)
            | glogit::Error::InvalidConfig(_)
            | glogit::Error::Domain { .. }
            | glogit::Error::LagTooLarge { .. }
            | glogit::Error::SeriesTooShort { .. } => CmdError::Usage(e.to_string()),
            _ => CmdError::Io(e.to_string()),
        }
    }
}

pub type CmdResult<T> = Result<T, CmdError>;
