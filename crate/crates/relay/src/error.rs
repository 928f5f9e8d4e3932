// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelayError {
    #[error("agent is not connected")]
    AgentOffline,
    #[error("remote path rejected: {0}")]
    RemotePathRejected(String),
    #[error("agent did not answer the listing in time")]
    ListTimeout,
    /// The transfer stalled or the agent went away; `received` bytes were
    /// already delivered, so the data seen so far is partial.
    #[error("transfer timed out after {received} bytes")]
    TransferTimeout { received: u64 },
    #[error("agent reported {code}: {message}")]
    Remote { code: String, message: String },
    #[error("authentication failed")]
    AuthFailed,
    #[error("unsupported protocol version {found}")]
    VersionMismatch { found: u32 },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl RelayError {
    /// Stable identifier used by the HTTP layer and the CLI.
    pub fn code(&self) -> &str {
        match self {
            RelayError::AgentOffline => "AgentOffline",
            RelayError::RemotePathRejected(_) => "RemotePathRejected",
            RelayError::ListTimeout => "ListTimeout",
            RelayError::TransferTimeout { .. } => "TransferTimeout",
            RelayError::Remote { code, .. } => code,
            RelayError::AuthFailed => "AuthFailed",
            RelayError::VersionMismatch { .. } => "VersionMismatch",
            RelayError::Protocol(_) => "ProtocolError",
            RelayError::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for RelayError {
    fn from(e: std::io::Error) -> Self {
        RelayError::Io(e.to_string())
    }
}
