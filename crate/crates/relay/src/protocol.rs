// SPDX-License-Identifier: Apache-2.0

//! Agent wire protocol.
//!
//! Every message is a 4-byte big-endian length followed by that many bytes of
//! UTF-8 JSON: `{"type": ..., "correlation_id": ..., "payload": {...}}`.
//! Responses echo the correlation id of the request they answer.

use base64::Engine;
use chrono::{DateTime, Utc};
use domainhub_core::EntryKind;
use serde::{Deserialize, Serialize};
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};

use crate::error::RelayError;

pub const PROTOCOL_VERSION: u32 = 1;

/// Upper bound on one encoded message body.
pub const MAX_FRAME_LEN: u32 = 8 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub correlation_id: u64,
    #[serde(flatten)]
    pub message: Message,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Message {
    Hello(Hello),
    HelloOk(HelloOk),
    Ping(Empty),
    Pong(Empty),
    ListReq(ListReq),
    ListResp(ListResp),
    FetchReq(FetchReq),
    FetchChunk(FetchChunk),
    FetchEnd(FetchEnd),
    Error(ErrorBody),
}

impl Message {
    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Hello(_) => "HELLO",
            Message::HelloOk(_) => "HELLO_OK",
            Message::Ping(_) => "PING",
            Message::Pong(_) => "PONG",
            Message::ListReq(_) => "LIST_REQ",
            Message::ListResp(_) => "LIST_RESP",
            Message::FetchReq(_) => "FETCH_REQ",
            Message::FetchChunk(_) => "FETCH_CHUNK",
            Message::FetchEnd(_) => "FETCH_END",
            Message::Error(_) => "ERROR",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Empty {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hello {
    pub version: u32,
    /// Session token of the account the agent acts for.
    pub token: String,
    pub agent_id: String,
    /// Share labels the agent serves. Informational.
    #[serde(default)]
    pub shares: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelloOk {
    pub session_id: u64,
    pub account: u64,
    pub heartbeat_secs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListReq {
    pub share: String,
    /// Share-relative path, `""` for the share root.
    pub path: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireEntry {
    pub name: String,
    pub kind: EntryKind,
    pub size: u64,
    pub modified: Option<DateTime<Utc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListResp {
    pub entries: Vec<WireEntry>,
}

/// Pull request for one chunk. The agent answers with a single
/// `FETCH_CHUNK`, or `FETCH_END` once `offset` reaches the end of the file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchReq {
    pub share: String,
    pub path: String,
    pub offset: u64,
    pub max_len: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchChunk {
    pub seq: u64,
    pub offset: u64,
    /// Base64 (standard alphabet, padded).
    pub data: String,
}

impl FetchChunk {
    pub fn new(seq: u64, offset: u64, bytes: &[u8]) -> Self {
        Self {
            seq,
            offset,
            data: base64::engine::general_purpose::STANDARD.encode(bytes),
        }
    }

    pub fn decode(&self) -> Result<Vec<u8>, RelayError> {
        base64::engine::general_purpose::STANDARD
            .decode(&self.data)
            .map_err(|e| RelayError::Protocol(format!("bad chunk encoding: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchEnd {
    pub size: u64,
}

/// Error codes carried in `ERROR` payloads.
pub mod codes {
    pub const AUTH_FAILED: &str = "AuthFailed";
    pub const VERSION_MISMATCH: &str = "VersionMismatch";
    pub const PROTOCOL: &str = "ProtocolError";
    pub const PATH_REJECTED: &str = "RemotePathRejected";
    pub const NO_SUCH_SHARE: &str = "NoSuchShare";
    pub const NOT_FOUND: &str = "NotFound";
    pub const NOT_A_FILE: &str = "NotAFile";
    pub const NOT_A_DIRECTORY: &str = "NotADirectory";
    pub const IO: &str = "Io";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ErrorBody {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

pub fn encode(frame: &Frame) -> Result<Vec<u8>, RelayError> {
    let body = serde_json::to_vec(frame).map_err(|e| RelayError::Protocol(e.to_string()))?;
    let len = u32::try_from(body.len())
        .ok()
        .filter(|n| *n <= MAX_FRAME_LEN)
        .ok_or_else(|| RelayError::Protocol(format!("frame of {} bytes too large", body.len())))?;
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub async fn write_frame<W: AsyncWrite + Unpin>(
    w: &mut W,
    frame: &Frame,
) -> Result<(), RelayError> {
    w.write_all(&encode(frame)?).await?;
    w.flush().await?;
    Ok(())
}

/// Reads one frame. `Ok(None)` on a clean end of stream at a frame boundary.
pub async fn read_frame<R: AsyncRead + Unpin>(r: &mut R) -> Result<Option<Frame>, RelayError> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len).await {
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME_LEN {
        return Err(RelayError::Protocol(format!(
            "frame length {len} exceeds limit"
        )));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body).await?;
    serde_json::from_slice(&body)
        .map(Some)
        .map_err(|e| RelayError::Protocol(format!("malformed frame: {e}")))
}
