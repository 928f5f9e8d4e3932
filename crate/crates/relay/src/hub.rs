// SPDX-License-Identifier: Apache-2.0

//! Server side of the relay. Agents dial in; the hub only ever accepts.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use domainhub_core::{Availability, MountBinding, MountTarget, RemoteEntry, UserId};
use tokio::io::{AsyncRead, AsyncWrite};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, Notify};
use tokio::time::Instant;

use crate::error::RelayError;
use crate::path::sanitize;
use crate::protocol::{
    codes, read_frame, write_frame, Empty, ErrorBody, FetchReq, Frame, HelloOk, ListReq, Message,
    WireEntry, PROTOCOL_VERSION,
};
use crate::task::AbortOnDrop;

#[derive(Clone, Debug)]
pub struct RelayConfig {
    pub chunk_size: u32,
    pub list_timeout: Duration,
    pub fetch_idle_timeout: Duration,
    pub heartbeat_interval: Duration,
    /// Consecutive missed heartbeats after which a session is dropped.
    pub missed_heartbeats: u32,
    pub handshake_timeout: Duration,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            chunk_size: 64 * 1024,
            list_timeout: Duration::from_secs(5),
            fetch_idle_timeout: Duration::from_secs(30),
            heartbeat_interval: Duration::from_secs(10),
            missed_heartbeats: 3,
            handshake_timeout: Duration::from_secs(10),
        }
    }
}

impl RelayConfig {
    fn liveness_window(&self) -> Duration {
        self.heartbeat_interval * self.missed_heartbeats
    }
}

/// Resolves the token an agent presents in `HELLO` to an account.
pub trait Authenticator: Send + Sync + 'static {
    fn authenticate(&self, token: &str) -> Option<UserId>;
}

impl<F> Authenticator for F
where
    F: Fn(&str) -> Option<UserId> + Send + Sync + 'static,
{
    fn authenticate(&self, token: &str) -> Option<UserId> {
        self(token)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionInfo {
    pub session_id: u64,
    pub account: UserId,
    pub agent_id: String,
    pub connected_at: DateTime<Utc>,
    pub last_heartbeat: DateTime<Utc>,
}

type SessionKey = (UserId, String);

enum RequestError {
    Timeout,
    Gone,
}

struct Session {
    id: u64,
    account: UserId,
    agent_id: String,
    connected_at: DateTime<Utc>,
    last_seen: Mutex<(Instant, DateTime<Utc>)>,
    outbound: mpsc::Sender<Frame>,
    pending: Mutex<HashMap<u64, oneshot::Sender<Message>>>,
    next_correlation: AtomicU64,
    closed: AtomicBool,
    close_signal: Notify,
}

impl Session {
    fn touch(&self) {
        *self.last_seen.lock().unwrap() = (Instant::now(), Utc::now());
    }

    fn fresh(&self, window: Duration) -> bool {
        !self.closed.load(Ordering::SeqCst) && self.last_seen.lock().unwrap().0.elapsed() < window
    }

    fn close(&self) {
        self.closed.store(true, Ordering::SeqCst);
        self.pending.lock().unwrap().clear();
        self.close_signal.notify_one();
    }

    fn info(&self) -> SessionInfo {
        SessionInfo {
            session_id: self.id,
            account: self.account,
            agent_id: self.agent_id.clone(),
            connected_at: self.connected_at,
            last_heartbeat: self.last_seen.lock().unwrap().1,
        }
    }

    async fn request(&self, message: Message, wait: Duration) -> Result<Message, RequestError> {
        if self.closed.load(Ordering::SeqCst) {
            return Err(RequestError::Gone);
        }
        let correlation_id = self.next_correlation.fetch_add(1, Ordering::Relaxed);
        let (tx, rx) = oneshot::channel();
        self.pending.lock().unwrap().insert(correlation_id, tx);
        let frame = Frame {
            correlation_id,
            message,
        };
        if self.outbound.send(frame).await.is_err() {
            self.pending.lock().unwrap().remove(&correlation_id);
            return Err(RequestError::Gone);
        }
        match tokio::time::timeout(wait, rx).await {
            Ok(Ok(reply)) => Ok(reply),
            Ok(Err(_)) => Err(RequestError::Gone),
            Err(_) => {
                self.pending.lock().unwrap().remove(&correlation_id);
                Err(RequestError::Timeout)
            }
        }
    }

    fn deliver(&self, frame: Frame) {
        if let Some(tx) = self.pending.lock().unwrap().remove(&frame.correlation_id) {
            let _ = tx.send(frame.message);
        }
    }
}

struct HubInner {
    config: RelayConfig,
    auth: Arc<dyn Authenticator>,
    sessions: Mutex<HashMap<SessionKey, Arc<Session>>>,
    next_session: AtomicU64,
}

/// Registry of live agent sessions and the relay operations that use them.
#[derive(Clone)]
pub struct Hub {
    inner: Arc<HubInner>,
}

impl std::fmt::Debug for Hub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hub")
            .field("config", &self.inner.config)
            .field("sessions", &self.inner.sessions.lock().unwrap().len())
            .finish()
    }
}

fn remote_error(body: ErrorBody) -> RelayError {
    if body.code == codes::PATH_REJECTED {
        RelayError::RemotePathRejected(body.message)
    } else {
        RelayError::Remote {
            code: body.code,
            message: body.message,
        }
    }
}

fn unexpected(m: &Message) -> RelayError {
    RelayError::Protocol(format!("unexpected {} reply", m.type_name()))
}

impl Hub {
    pub fn new(config: RelayConfig, auth: impl Authenticator) -> Self {
        Self {
            inner: Arc::new(HubInner {
                config,
                auth: Arc::new(auth),
                sessions: Mutex::new(HashMap::new()),
                next_session: AtomicU64::new(1),
            }),
        }
    }

    pub fn config(&self) -> &RelayConfig {
        &self.inner.config
    }

    /// Accepts agent connections until the listener fails.
    pub async fn listen(&self, listener: TcpListener) -> std::io::Result<()> {
        loop {
            let (stream, peer) = listener.accept().await?;
            let hub = self.clone();
            tokio::spawn(async move {
                if let Err(e) = hub.serve_connection(stream).await {
                    tracing::info!(%peer, error = %e, "agent connection ended");
                }
            });
        }
    }

    /// Runs one agent connection from handshake to close.
    pub async fn serve_connection<S>(&self, stream: S) -> Result<(), RelayError>
    where
        S: AsyncRead + AsyncWrite + Send + 'static,
    {
        let cfg = &self.inner.config;
        let (mut rd, mut wr) = tokio::io::split(stream);
        let first = tokio::time::timeout(cfg.handshake_timeout, read_frame(&mut rd))
            .await
            .map_err(|_| RelayError::Protocol("no HELLO before timeout".into()))??
            .ok_or_else(|| RelayError::Protocol("closed before HELLO".into()))?;
        let refuse = |code: &str, msg: String| Frame {
            correlation_id: first.correlation_id,
            message: Message::Error(ErrorBody::new(code, msg)),
        };
        let hello = match first.message {
            Message::Hello(h) => h,
            other => {
                let err =
                    RelayError::Protocol(format!("expected HELLO, got {}", other.type_name()));
                write_frame(&mut wr, &refuse(codes::PROTOCOL, err.to_string())).await?;
                return Err(err);
            }
        };
        if hello.version != PROTOCOL_VERSION {
            let err = RelayError::VersionMismatch {
                found: hello.version,
            };
            write_frame(&mut wr, &refuse(codes::VERSION_MISMATCH, err.to_string())).await?;
            return Err(err);
        }
        let Some(account) = self.inner.auth.authenticate(&hello.token) else {
            write_frame(&mut wr, &refuse(codes::AUTH_FAILED, "invalid token".into())).await?;
            return Err(RelayError::AuthFailed);
        };
        if hello.agent_id.trim().is_empty() {
            let err = RelayError::Protocol("empty agent id".into());
            write_frame(&mut wr, &refuse(codes::PROTOCOL, err.to_string())).await?;
            return Err(err);
        }

        let (out_tx, mut out_rx) = mpsc::channel::<Frame>(64);
        let session = Arc::new(Session {
            id: self.inner.next_session.fetch_add(1, Ordering::Relaxed),
            account,
            agent_id: hello.agent_id.clone(),
            connected_at: Utc::now(),
            last_seen: Mutex::new((Instant::now(), Utc::now())),
            outbound: out_tx,
            pending: Mutex::new(HashMap::new()),
            next_correlation: AtomicU64::new(1),
            closed: AtomicBool::new(false),
            close_signal: Notify::new(),
        });
        write_frame(
            &mut wr,
            &Frame {
                correlation_id: first.correlation_id,
                message: Message::HelloOk(HelloOk {
                    session_id: session.id,
                    account: account.0,
                    heartbeat_secs: cfg.heartbeat_interval.as_secs(),
                }),
            },
        )
        .await?;
        let key = (account, hello.agent_id);
        let superseded = self
            .inner
            .sessions
            .lock()
            .unwrap()
            .insert(key.clone(), session.clone());
        if let Some(old) = superseded {
            old.close();
        }

        let _writer = AbortOnDrop(tokio::spawn(async move {
            while let Some(frame) = out_rx.recv().await {
                if write_frame(&mut wr, &frame).await.is_err() {
                    break;
                }
            }
        }));
        // Reads happen in their own task so the select below never cancels a
        // partially read frame.
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

        let mut watchdog = tokio::time::interval(cfg.heartbeat_interval);
        watchdog.tick().await;
        let outcome = loop {
            tokio::select! {
                _ = session.close_signal.notified() => break Ok(()),
                _ = watchdog.tick() => {
                    if !session.fresh(cfg.liveness_window()) {
                        break Err(RelayError::Protocol("heartbeats missed".into()));
                    }
                }
                next = in_rx.recv() => match next {
                    None | Some(Ok(None)) => break Ok(()),
                    Some(Err(e)) => break Err(e),
                    Some(Ok(Some(frame))) => {
                        session.touch();
                        match frame.message {
                            Message::Ping(_) => {
                                let pong = Frame {
                                    correlation_id: frame.correlation_id,
                                    message: Message::Pong(Empty {}),
                                };
                                let _ = session.outbound.send(pong).await;
                            }
                            Message::Pong(_) => {}
                            Message::ListResp(_)
                            | Message::FetchChunk(_)
                            | Message::FetchEnd(_)
                            | Message::Error(_) => session.deliver(frame),
                            other => {
                                let err = Frame {
                                    correlation_id: frame.correlation_id,
                                    message: Message::Error(ErrorBody::new(
                                        codes::PROTOCOL,
                                        format!("{} not accepted from agents", other.type_name()),
                                    )),
                                };
                                let _ = session.outbound.send(err).await;
                            }
                        }
                    }
                },
            }
        };

        session.close();
        {
            let mut sessions = self.inner.sessions.lock().unwrap();
            if sessions.get(&key).is_some_and(|s| Arc::ptr_eq(s, &session)) {
                sessions.remove(&key);
            }
        }
        outcome
    }

    fn live_session(&self, account: UserId, agent_id: &str) -> Option<Arc<Session>> {
        let sessions = self.inner.sessions.lock().unwrap();
        sessions
            .get(&(account, agent_id.to_string()))
            .filter(|s| s.fresh(self.inner.config.liveness_window()))
            .cloned()
    }

    pub fn is_live(&self, account: UserId, agent_id: &str) -> bool {
        self.live_session(account, agent_id).is_some()
    }

    pub fn session(&self, account: UserId, agent_id: &str) -> Option<SessionInfo> {
        self.live_session(account, agent_id).map(|s| s.info())
    }

    pub fn sessions(&self) -> Vec<SessionInfo> {
        let window = self.inner.config.liveness_window();
        let mut out: Vec<SessionInfo> = self
            .inner
            .sessions
            .lock()
            .unwrap()
            .values()
            .filter(|s| s.fresh(window))
            .map(|s| s.info())
            .collect();
        out.sort_by_key(|s| s.session_id);
        out
    }

    /// Lists `path` inside one binding's share.
    pub async fn list(
        &self,
        binding: &MountBinding,
        path: &str,
    ) -> Result<Vec<WireEntry>, RelayError> {
        sanitize(path)?;
        let session = self
            .live_session(binding.account, &binding.agent_id)
            .ok_or(RelayError::AgentOffline)?;
        let req = Message::ListReq(ListReq {
            share: binding.share_path.clone(),
            path: path.to_string(),
        });
        let reply = session
            .request(req, self.inner.config.list_timeout)
            .await
            .map_err(|e| match e {
                RequestError::Timeout => RelayError::ListTimeout,
                RequestError::Gone => RelayError::AgentOffline,
            })?;
        let mut entries = match reply {
            Message::ListResp(r) => r.entries,
            Message::Error(body) => return Err(remote_error(body)),
            other => return Err(unexpected(&other)),
        };
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        let bad_name = entries
            .iter()
            .any(|e| e.name.is_empty() || e.name.contains('/') || e.name == "." || e.name == "..");
        if bad_name || entries.windows(2).any(|w| w[0].name == w[1].name) {
            return Err(RelayError::Protocol("agent sent an invalid listing".into()));
        }
        Ok(entries)
    }

    /// Merged listing over several bindings. A binding whose agent cannot
    /// answer contributes one `Unavailable` placeholder instead of failing
    /// the whole listing. Only an invalid `path` is an error.
    pub async fn list_entries(
        &self,
        targets: &[MountTarget],
        path: &str,
    ) -> Result<Vec<RemoteEntry>, RelayError> {
        sanitize(path)?;
        let listings =
            futures::future::join_all(targets.iter().map(|t| self.list(&t.binding, path))).await;
        let mut out = Vec::new();
        for (target, listing) in targets.iter().zip(listings) {
            match listing {
                Ok(entries) => out.extend(entries.into_iter().map(|e| RemoteEntry {
                    binding: target.binding.id,
                    label: target.label.clone(),
                    name: e.name,
                    kind: e.kind,
                    size: e.size,
                    modified: e.modified,
                    availability: Availability::Live,
                })),
                Err(e) => {
                    tracing::debug!(binding = %target.binding.id, error = %e, "mount unavailable");
                    out.push(RemoteEntry::unavailable(target));
                }
            }
        }
        Ok(out)
    }

    /// Starts relaying one file. The first chunk is requested before this
    /// returns, so offline agents and rejected paths surface here.
    pub async fn fetch(&self, binding: &MountBinding, path: &str) -> Result<Transfer, RelayError> {
        sanitize(path)?;
        let session = self
            .live_session(binding.account, &binding.agent_id)
            .ok_or(RelayError::AgentOffline)?;
        let mut transfer = Transfer {
            session,
            share: binding.share_path.clone(),
            path: path.to_string(),
            chunk_size: self.inner.config.chunk_size,
            idle_timeout: self.inner.config.fetch_idle_timeout,
            offset: 0,
            seq: 0,
            buffered: None,
            finished: false,
        };
        match transfer.pull().await {
            Ok(first) => {
                transfer.buffered = first;
                Ok(transfer)
            }
            Err(RelayError::TransferTimeout { received: 0 })
                if transfer.session.closed.load(Ordering::SeqCst) =>
            {
                Err(RelayError::AgentOffline)
            }
            Err(e) => Err(e),
        }
    }
}

/// A file being pulled from an agent chunk by chunk. At most one chunk is
/// held at a time.
pub struct Transfer {
    session: Arc<Session>,
    share: String,
    path: String,
    chunk_size: u32,
    idle_timeout: Duration,
    offset: u64,
    seq: u64,
    buffered: Option<Vec<u8>>,
    finished: bool,
}

impl std::fmt::Debug for Transfer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transfer")
            .field("share", &self.share)
            .field("path", &self.path)
            .field("received", &self.offset)
            .field("finished", &self.finished)
            .finish()
    }
}

impl Transfer {
    /// Bytes received from the agent so far.
    pub fn received(&self) -> u64 {
        self.offset
    }

    async fn pull(&mut self) -> Result<Option<Vec<u8>>, RelayError> {
        if self.finished {
            return Ok(None);
        }
        let req = Message::FetchReq(FetchReq {
            share: self.share.clone(),
            path: self.path.clone(),
            offset: self.offset,
            max_len: self.chunk_size,
        });
        let reply = self
            .session
            .request(req, self.idle_timeout)
            .await
            .map_err(|_| RelayError::TransferTimeout {
                received: self.offset,
            })?;
        match reply {
            Message::FetchChunk(chunk) => {
                let data = chunk.decode()?;
                if chunk.seq != self.seq || chunk.offset != self.offset {
                    return Err(RelayError::Protocol("chunk out of order".into()));
                }
                if data.is_empty() || data.len() > self.chunk_size as usize {
                    return Err(RelayError::Protocol("bad chunk length".into()));
                }
                self.seq += 1;
                self.offset += data.len() as u64;
                Ok(Some(data))
            }
            Message::FetchEnd(end) => {
                if end.size != self.offset {
                    return Err(RelayError::Protocol(format!(
                        "agent reported size {} after {} bytes",
                        end.size, self.offset
                    )));
                }
                self.finished = true;
                Ok(None)
            }
            Message::Error(body) => Err(remote_error(body)),
            other => Err(unexpected(&other)),
        }
    }

    /// Next chunk of the file, `None` at the end.
    pub async fn next_chunk(&mut self) -> Option<Result<Vec<u8>, RelayError>> {
        if let Some(first) = self.buffered.take() {
            return Some(Ok(first));
        }
        self.pull().await.transpose()
    }

    pub fn into_stream(self) -> impl futures::Stream<Item = Result<Vec<u8>, RelayError>> + Send {
        futures::stream::unfold((self, false), |(mut t, failed)| async move {
            if failed {
                return None;
            }
            let next = t.next_chunk().await?;
            let failed = next.is_err();
            Some((next, (t, failed)))
        })
    }

    /// Collects the whole file. On failure the error carries the partial
    /// byte count.
    pub async fn read_to_end(mut self) -> Result<Vec<u8>, RelayError> {
        let mut out = Vec::new();
        while let Some(chunk) = self.next_chunk().await {
            out.extend_from_slice(&chunk?);
        }
        Ok(out)
    }
}
