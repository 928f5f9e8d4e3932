// SPDX-License-Identifier: Apache-2.0

//! Reference agent: dials the hub and serves local directories read-only.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use domainhub_core::EntryKind;
use tokio::io::{AsyncRead, AsyncWrite};
use tokio::sync::mpsc;

use crate::error::RelayError;
use crate::path::sanitize;
use crate::protocol::{
    codes, read_frame, write_frame, Empty, ErrorBody, FetchChunk, FetchEnd, FetchReq, Frame, Hello,
    HelloOk, ListReq, ListResp, Message, WireEntry, PROTOCOL_VERSION,
};
use crate::task::AbortOnDrop;

/// Result of reading at an offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReadOutcome {
    Data(Vec<u8>),
    End { size: u64 },
}

/// Filesystem access as seen by the agent. Paths arrive already validated
/// and split into segments.
pub trait ShareFs: Send + Sync + 'static {
    fn shares(&self) -> Vec<String>;
    fn list(&self, share: &str, path: &[String]) -> Result<Vec<WireEntry>, ErrorBody>;
    fn read(
        &self,
        share: &str,
        path: &[String],
        offset: u64,
        max_len: u32,
    ) -> Result<ReadOutcome, ErrorBody>;
}

/// Local directories exposed under share labels.
#[derive(Clone, Debug, Default)]
pub struct LocalShares {
    roots: BTreeMap<String, PathBuf>,
}

fn io_error(e: std::io::Error) -> ErrorBody {
    match e.kind() {
        std::io::ErrorKind::NotFound => ErrorBody::new(codes::NOT_FOUND, "no such file"),
        _ => ErrorBody::new(codes::IO, e.to_string()),
    }
}

impl LocalShares {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_share(mut self, label: impl Into<String>, root: impl Into<PathBuf>) -> Self {
        self.roots.insert(label.into(), root.into());
        self
    }

    /// Joins the segments under the share root and makes sure symlinks do
    /// not lead outside it.
    fn resolve(&self, share: &str, path: &[String]) -> Result<PathBuf, ErrorBody> {
        let root = self
            .roots
            .get(share)
            .ok_or_else(|| ErrorBody::new(codes::NO_SUCH_SHARE, format!("no share {share:?}")))?;
        let root = root.canonicalize().map_err(io_error)?;
        let joined = path.iter().fold(root.clone(), |p, seg| p.join(seg));
        let real = joined.canonicalize().map_err(io_error)?;
        if !real.starts_with(&root) {
            return Err(ErrorBody::new(
                codes::PATH_REJECTED,
                "path leaves the share",
            ));
        }
        Ok(real)
    }
}

fn modified(meta: &fs::Metadata) -> Option<DateTime<Utc>> {
    meta.modified().ok().map(DateTime::<Utc>::from)
}

fn entry(name: String, meta: &fs::Metadata) -> WireEntry {
    let dir = meta.is_dir();
    WireEntry {
        name,
        kind: if dir { EntryKind::Dir } else { EntryKind::File },
        size: if dir { 0 } else { meta.len() },
        modified: modified(meta),
    }
}

fn read_at(path: &Path, offset: u64, max_len: u32) -> Result<ReadOutcome, ErrorBody> {
    let mut file = fs::File::open(path).map_err(io_error)?;
    let meta = file.metadata().map_err(io_error)?;
    if !meta.is_file() {
        return Err(ErrorBody::new(codes::NOT_A_FILE, "not a regular file"));
    }
    if offset >= meta.len() {
        return Ok(ReadOutcome::End { size: meta.len() });
    }
    file.seek(SeekFrom::Start(offset)).map_err(io_error)?;
    let mut buf = Vec::with_capacity(max_len as usize);
    file.take(u64::from(max_len))
        .read_to_end(&mut buf)
        .map_err(io_error)?;
    if buf.is_empty() {
        // Truncated underneath us.
        return Ok(ReadOutcome::End { size: offset });
    }
    Ok(ReadOutcome::Data(buf))
}

impl ShareFs for LocalShares {
    fn shares(&self) -> Vec<String> {
        self.roots.keys().cloned().collect()
    }

    fn list(&self, share: &str, path: &[String]) -> Result<Vec<WireEntry>, ErrorBody> {
        let dir = self.resolve(share, path)?;
        if !dir.is_dir() {
            return Err(ErrorBody::new(codes::NOT_A_DIRECTORY, "not a directory"));
        }
        let mut out = Vec::new();
        for item in fs::read_dir(&dir).map_err(io_error)? {
            let item = item.map_err(io_error)?;
            let Ok(name) = item.file_name().into_string() else {
                continue;
            };
            let Ok(meta) = fs::metadata(item.path()) else {
                continue;
            };
            out.push(entry(name, &meta));
        }
        out.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(out)
    }

    fn read(
        &self,
        share: &str,
        path: &[String],
        offset: u64,
        max_len: u32,
    ) -> Result<ReadOutcome, ErrorBody> {
        read_at(&self.resolve(share, path)?, offset, max_len)
    }
}

#[derive(Clone, Debug)]
pub struct AgentConfig {
    pub token: String,
    pub agent_id: String,
    pub heartbeat_interval: Duration,
}

impl AgentConfig {
    pub fn new(token: impl Into<String>, agent_id: impl Into<String>) -> Self {
        Self {
            token: token.into(),
            agent_id: agent_id.into(),
            heartbeat_interval: Duration::from_secs(10),
        }
    }
}

#[derive(Clone)]
pub struct Agent {
    config: AgentConfig,
    fs: Arc<dyn ShareFs>,
}

impl std::fmt::Debug for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Agent")
            .field("agent_id", &self.config.agent_id)
            .field("shares", &self.fs.shares())
            .finish()
    }
}

/// An agent whose handshake succeeded, ready to serve requests.
pub struct AgentConnection<S> {
    stream: S,
    hello: HelloOk,
    agent: Agent,
}

impl Agent {
    pub fn new(config: AgentConfig, fs: Arc<dyn ShareFs>) -> Self {
        Self { config, fs }
    }

    pub async fn handshake<S>(&self, mut stream: S) -> Result<AgentConnection<S>, RelayError>
    where
        S: AsyncRead + AsyncWrite + Unpin,
    {
        let hello = Frame {
            correlation_id: 0,
            message: Message::Hello(Hello {
                version: PROTOCOL_VERSION,
                token: self.config.token.clone(),
                agent_id: self.config.agent_id.clone(),
                shares: self.fs.shares(),
            }),
        };
        write_frame(&mut stream, &hello).await?;
        let reply = read_frame(&mut stream)
            .await?
            .ok_or_else(|| RelayError::Protocol("hub closed during handshake".into()))?;
        match reply.message {
            Message::HelloOk(ok) => Ok(AgentConnection {
                stream,
                hello: ok,
                agent: self.clone(),
            }),
            Message::Error(e) if e.code == codes::AUTH_FAILED => Err(RelayError::AuthFailed),
            Message::Error(e) => Err(RelayError::Remote {
                code: e.code,
                message: e.message,
            }),
            other => Err(RelayError::Protocol(format!(
                "expected HELLO_OK, got {}",
                other.type_name()
            ))),
        }
    }

    /// Dials `addr`, handshakes and serves until the connection ends.
    pub async fn run_tcp(&self, addr: &str) -> Result<(), RelayError> {
        let stream = tokio::net::TcpStream::connect(addr).await?;
        stream.set_nodelay(true)?;
        self.handshake(stream).await?.serve().await
    }
}

fn respond(fs: &dyn ShareFs, message: Message) -> Message {
    match message {
        Message::Ping(_) => Message::Pong(Empty {}),
        Message::ListReq(ListReq { share, path }) => match sanitize(&path) {
            Err(e) => Message::Error(ErrorBody::new(codes::PATH_REJECTED, e.to_string())),
            Ok(segs) => match fs.list(&share, &segs) {
                Ok(entries) => Message::ListResp(ListResp { entries }),
                Err(e) => Message::Error(e),
            },
        },
        Message::FetchReq(FetchReq {
            share,
            path,
            offset,
            max_len,
        }) => match sanitize(&path) {
            Err(e) => Message::Error(ErrorBody::new(codes::PATH_REJECTED, e.to_string())),
            Ok(_) if max_len == 0 => {
                Message::Error(ErrorBody::new(codes::PROTOCOL, "max_len must be positive"))
            }
            Ok(segs) => match fs.read(&share, &segs, offset, max_len) {
                Ok(ReadOutcome::Data(bytes)) => {
                    // The hub pulls fixed-size chunks, so the index follows
                    // from the offset.
                    let seq = offset / u64::from(max_len);
                    Message::FetchChunk(FetchChunk::new(seq, offset, &bytes))
                }
                Ok(ReadOutcome::End { size }) => Message::FetchEnd(FetchEnd { size }),
                Err(e) => Message::Error(e),
            },
        },
        other => Message::Error(ErrorBody::new(
            codes::PROTOCOL,
            format!("{} not accepted by agents", other.type_name()),
        )),
    }
}

impl<S> AgentConnection<S>
where
    S: AsyncRead + AsyncWrite + Send + 'static,
{
    pub fn hello(&self) -> &HelloOk {
        &self.hello
    }

    /// Serves requests and sends heartbeats until the hub closes the stream.
    pub async fn serve(self) -> Result<(), RelayError> {
        let (mut rd, mut wr) = tokio::io::split(self.stream);
        let (out_tx, mut out_rx) = mpsc::channel::<Frame>(64);
        let _writer = AbortOnDrop(tokio::spawn(async move {
            while let Some(frame) = out_rx.recv().await {
                if write_frame(&mut wr, &frame).await.is_err() {
                    break;
                }
            }
        }));
        let (in_tx, mut in_rx) = mpsc::channel::<Result<Option<Frame>, RelayError>>(64);
        let _reader = AbortOnDrop(tokio::spawn(async move {
            loop {
                let next = read_frame(&mut rd).await;
                let stop = !matches!(next, Ok(Some(_)));
                if in_tx.send(next).await.is_err() || stop {
                    break;
                }
            }
        }));

        let mut heartbeat = tokio::time::interval(self.agent.config.heartbeat_interval);
        let mut ping_id = 0u64;
        let outcome = loop {
            tokio::select! {
                _ = heartbeat.tick() => {
                    ping_id += 1;
                    let ping = Frame { correlation_id: ping_id, message: Message::Ping(Empty {}) };
                    if out_tx.send(ping).await.is_err() {
                        break Ok(());
                    }
                }
                next = in_rx.recv() => match next {
                    None | Some(Ok(None)) => break Ok(()),
                    Some(Err(e)) => break Err(e),
                    Some(Ok(Some(frame))) => match frame.message {
                        Message::Pong(_) => {}
                        Message::Error(e) => {
                            tracing::warn!(code = %e.code, message = %e.message, "hub reported error");
                        }
                        message => {
                            let fs = self.agent.fs.clone();
                            let out = out_tx.clone();
                            tokio::spawn(async move {
                                let reply = tokio::task::spawn_blocking(move || respond(&*fs, message))
                                    .await
                                    .unwrap_or_else(|e| {
                                        Message::Error(ErrorBody::new(codes::IO, e.to_string()))
                                    });
                                let _ = out
                                    .send(Frame { correlation_id: frame.correlation_id, message: reply })
                                    .await;
                            });
                        }
                    },
                },
            }
        };
        outcome
    }
}
