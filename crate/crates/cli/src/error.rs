use std::fmt;

use crisis_mt_backends::{BackendError, EvalError};
use crisis_mt_core::{CorpusError, LeaderboardError};
use crisis_mt_service::{ApiError, ConfigError, ServeError, StartupError, StoreError};

/// Exit codes: 1 validation, 2 I/O, 3 remote backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Validation = 1,
    Io = 2,
    Remote = 3,
}

impl Kind {
    pub fn code(self) -> &'static str {
        match self {
            Kind::Validation => "validation",
            Kind::Io => "io",
            Kind::Remote => "remote_backend",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Validation,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Io,
            message: message.into(),
        }
    }

    pub fn remote(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Remote,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        if e.is_io() {
            CliError::io(e.to_string())
        } else {
            CliError::validation(e.to_string())
        }
    }
}

impl From<LeaderboardError> for CliError {
    fn from(e: LeaderboardError) -> Self {
        match e {
            LeaderboardError::Io { .. } => CliError::io(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::MissingToken(_) | BackendError::Client(_) => CliError::remote(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Backend(b) => b.into(),
            EvalError::AllFailed { .. } => CliError::remote(e.to_string()),
            EvalError::Io { .. } => CliError::io(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<StartupError> for CliError {
    fn from(e: StartupError) -> Self {
        match e {
            StartupError::Store(s) => s.into(),
            StartupError::Records(r) => r.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::io(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<ServeError> for CliError {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::Startup(s) => s.into(),
            _ => CliError::io(e.to_string()),
        }
    }
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        if e.status.is_server_error() {
            CliError::io(e.message)
        } else {
            CliError::validation(e.message)
        }
    }
}
