// SPDX-License-Identifier: Apache-2.0

//! Loopback harness: a hub on a local TCP port and agents dialing into it.

#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime};

use domainhub_core::{BindingId, DirectoryId, MountBinding, UserId};
use domainhub_relay::protocol::{ErrorBody, WireEntry};
use domainhub_relay::{Agent, AgentConfig, Hub, ReadOutcome, RelayConfig, ShareFs};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

/// Tokens are `tok-<user id>`.
pub fn token_auth(token: &str) -> Option<UserId> {
    token.strip_prefix("tok-")?.parse().ok().map(UserId)
}

pub struct Harness {
    pub hub: Hub,
    pub addr: SocketAddr,
    /// Local address of every hub-side socket, recorded at accept time.
    pub accepted: Arc<Mutex<Vec<SocketAddr>>>,
    pub agent_dials: Arc<Mutex<usize>>,
}

impl Harness {
    pub async fn start(config: RelayConfig) -> Self {
        let hub = Hub::new(config, token_auth);
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let accepted = Arc::new(Mutex::new(Vec::new()));
        let log = accepted.clone();
        let h = hub.clone();
        tokio::spawn(async move {
            loop {
                let (stream, _) = listener.accept().await.unwrap();
                log.lock().unwrap().push(stream.local_addr().unwrap());
                let h = h.clone();
                tokio::spawn(async move {
                    let _ = h.serve_connection(stream).await;
                });
            }
        });
        Self {
            hub,
            addr,
            accepted,
            agent_dials: Arc::new(Mutex::new(0)),
        }
    }

    /// Connects an agent and waits until the hub reports it live.
    pub async fn connect(&self, user: u64, agent_id: &str, fs: Arc<dyn ShareFs>) -> JoinHandle<()> {
        let mut config = AgentConfig::new(format!("tok-{user}"), agent_id);
        config.heartbeat_interval = Duration::from_millis(200);
        let agent = Agent::new(config, fs);
        *self.agent_dials.lock().unwrap() += 1;
        let stream = tokio::net::TcpStream::connect(self.addr).await.unwrap();
        let conn = agent.handshake(stream).await.unwrap();
        let handle = tokio::spawn(async move {
            let _ = conn.serve().await;
        });
        for _ in 0..200 {
            if self.hub.is_live(UserId(user), agent_id) {
                break;
            }
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
        assert!(self.hub.is_live(UserId(user), agent_id));
        handle
    }

    /// True when every hub-side socket was accepted on the listening port.
    pub fn only_inbound(&self) -> bool {
        let accepted = self.accepted.lock().unwrap();
        accepted.len() == *self.agent_dials.lock().unwrap()
            && accepted.iter().all(|a| a.port() == self.addr.port())
    }
}

pub fn binding(id: u64, user: u64, agent_id: &str, share: &str) -> MountBinding {
    MountBinding {
        id: BindingId(id),
        directory: DirectoryId(1),
        account: UserId(user),
        agent_id: agent_id.into(),
        share_path: share.into(),
        created_at: SystemTime::UNIX_EPOCH.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Call {
    List,
    Read,
}

/// Wraps a filesystem, logging calls and optionally stalling.
pub struct Recording<F> {
    pub inner: F,
    pub calls: Mutex<Vec<(Call, Vec<String>)>>,
    /// Reads at or beyond this offset block for a long time.
    pub stall_from: Option<u64>,
    pub list_delay: Option<Duration>,
}

impl<F> Recording<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            calls: Mutex::new(Vec::new()),
            stall_from: None,
            list_delay: None,
        }
    }

    pub fn calls(&self) -> Vec<(Call, Vec<String>)> {
        self.calls.lock().unwrap().clone()
    }
}

impl<F: ShareFs> ShareFs for Recording<F> {
    fn shares(&self) -> Vec<String> {
        self.inner.shares()
    }

    fn list(&self, share: &str, path: &[String]) -> Result<Vec<WireEntry>, ErrorBody> {
        self.calls.lock().unwrap().push((Call::List, path.to_vec()));
        if let Some(d) = self.list_delay {
            std::thread::sleep(d);
        }
        self.inner.list(share, path)
    }

    fn read(
        &self,
        share: &str,
        path: &[String],
        offset: u64,
        max_len: u32,
    ) -> Result<ReadOutcome, ErrorBody> {
        self.calls.lock().unwrap().push((Call::Read, path.to_vec()));
        if self.stall_from.is_some_and(|s| offset >= s) {
            std::thread::sleep(Duration::from_secs(1));
        }
        self.inner.read(share, path, offset, max_len)
    }
}

/// Payloads that try to leave the share root.
pub const TRAVERSAL_CORPUS: &[&str] = &[
    "..",
    "../",
    "../secret",
    "../../etc/passwd",
    "a/../../b",
    "a/..",
    "a/../..",
    "./../x",
    "./x",
    "...",
    "....//x",
    "..\\secret",
    "a\\..\\..\\b",
    "/etc/passwd",
    "/",
    "//server/share",
    "C:\\Windows\\win.ini",
    "C:/Windows/win.ini",
    "%2e%2e/secret",
    "%2E%2E/secret",
    "..%2fsecret",
    "..%5csecret",
    "%2e%2e%2fsecret",
    "~/.ssh/id_rsa",
    "a\0b",
    "..\0/x",
    "a/\n../b",
    "a//../b",
];
